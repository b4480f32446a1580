#include "usc/models.hpp"

#include <cmath>
#include <numbers>

namespace usc {

std::string model_name(Model m) {
    return m == Model::ising ? "ising" : "xy";
}

Model parse_model(const std::string& s) {
    if (s == "ising") return Model::ising;
    if (s == "xy") return Model::xy;
    throw ConfigError("unknown model '" + s + "'");
}

ChainSpec ChainSpec::uniform(Model model, int n, double lambda) {
    ChainSpec s;
    s.model = model;
    s.n = n;
    s.omega.assign(static_cast<std::size_t>(std::max(n, 0)), 1.0);
    s.lambda = lambda;
    return s;
}

double ChainSpec::omega_at(int site) const {
    return omega.empty() ? 1.0 : omega.at(static_cast<std::size_t>(site - 1));
}

void ChainSpec::validate() const {
    if (n < 1) throw ConfigError("chain needs at least one site");
    if (n > 12) throw ConfigError("N too large");
    if (!omega.empty() && static_cast<int>(omega.size()) != n)
        throw ConfigError("omega length must equal n");
    for (double w : omega)
        if (!(w > 0.0)) throw ConfigError("qubit frequencies must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    for (const auto& p : perturb)
        if (p.site < 1 || p.site > n) throw ConfigError("bad site");
}

std::vector<Perturbation> uniform_sigma_x_perturbation(int n, double eps) {
    std::vector<Perturbation> out;
    for (int i = 1; i <= n; ++i) out.push_back({i, Axis::x, eps});
    return out;
}

Operator h_free(const ChainSpec& spec) {
    spec.validate();
    const std::size_t dim = std::size_t{1} << spec.n;
    Operator h = Operator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t b = 0; b < dim; ++b) {
        double e = 0.0;
        for (int i = 1; i <= spec.n; ++i) {
            const bool up = (b & (std::size_t{1} << (spec.n - i))) == 0;
            e += -0.5 * spec.omega_at(i) * (up ? 1.0 : -1.0);
        }
        h(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = e;
    }
    return h;
}

namespace {

Operator bond(Axis a, int i, int n) {
    return site_pauli(a, i, n) * site_pauli(a, i + 1, n);
}

void require_chain(const ChainSpec& spec) {
    spec.validate();
    if (spec.n < 2) throw ConfigError("chain too short");
}

}  // namespace

Operator h_ising(const ChainSpec& spec) {
    require_chain(spec);
    Operator h = h_free(spec);
    for (int i = 1; i < spec.n; ++i) h -= spec.lambda * bond(Axis::x, i, spec.n);
    return h;
}

Operator h_xy(const ChainSpec& spec) {
    require_chain(spec);
    Operator h = h_free(spec);
    for (int i = 1; i < spec.n; ++i)
        h -= spec.lambda * bond(i % 2 == 1 ? Axis::x : Axis::y, i, spec.n);
    return h;
}

Operator add_perturbation(const Operator& h, const ChainSpec& spec) {
    spec.validate();
    Operator out = h;
    for (const auto& p : spec.perturb)
        if (p.strength != 0.0) out += p.strength * site_pauli(p.axis, p.site, spec.n);
    return out;
}

Operator hamiltonian(const ChainSpec& spec) {
    spec.validate();
    Operator h;
    if (spec.n == 1)
        h = h_free(spec);
    else
        h = spec.model == Model::ising ? h_ising(spec) : h_xy(spec);
    return add_perturbation(h, spec);
}

Spectrum chain_spectrum(const ChainSpec& spec) {
    const Operator h = hamiltonian(spec);
    const Operator p = parity_operator(spec.n);
    // a parity-breaking perturbation leaves nothing to resolve degenerate clusters by
    if (max_abs(h * p - p * h) > 1e-12 * std::max(1.0, max_abs(h))) return eigh(h);
    return resolve_degeneracy(eigh(h), p);
}

LogicalQubit logical_qubit(const Spectrum& s) {
    if (s.dim() < 2) throw ConfigError("logical qubit needs at least two levels");
    LogicalQubit q;
    q.ket0 = s.state(0);
    q.ket1 = s.state(1);
    q.omega10 = s.eigenvalues(1) - s.eigenvalues(0);
    return q;
}

LogicalQubit logical_qubit(const ChainSpec& spec) {
    return logical_qubit(chain_spectrum(spec));
}

namespace {

StateVector ket(cplx a, cplx b) {
    StateVector v(2);
    v << a, b;
    return v;
}

StateVector tensor(std::initializer_list<StateVector> parts) {
    StateVector out = StateVector::Ones(1);
    for (const auto& p : parts) {
        StateVector next(out.size() * p.size());
        for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * p.size(), p.size()) = out(i) * p;
        out = next;
    }
    return out;
}

}  // namespace

std::vector<StateVector> appendix_a_states(int n) {
    const double r = 1.0 / std::sqrt(2.0);
    const cplx I(0.0, 1.0);
    // sigma_x eigenstates
    const StateVector up = ket(r, r), dn = ket(r, -r);
    // sigma_y eigenstates: right = -1, left = +1
    const StateVector right = ket(r, -I * r), left = ket(r, I * r);

    if (n == 3) {
        const cplx w = std::polar(1.0, std::numbers::pi / 4.0);
        const StateVector ne = ket(r, w * r);
        const StateVector sw = ket(r, -std::conj(w) * r);
        const StateVector nw = ket(r, std::conj(w) * r);
        const StateVector se = ket(r, -w * r);

        const StateVector a = tensor({dn, sw, left});
        const StateVector b = tensor({up, ne, left});
        const StateVector c = tensor({up, nw, right});
        const StateVector d = tensor({dn, se, right});

        std::vector<StateVector> out;
        out.push_back(0.5 * I * (-a + b - c + d));
        out.push_back(0.5 * (std::conj(w) * (-a + c) + w * (b - d)));
        out.push_back(0.5 * (w * (a - c) + std::conj(w) * (-b + d)));
        out.push_back(0.5 * (a + b + c + d));
        return out;
    }
    if (n == 4) {
        const double ap = 1.0 / std::sqrt(5.0 + std::sqrt(5.0));
        const double am = 1.0 / std::sqrt(5.0 - std::sqrt(5.0));
        const double c1 = am - ap, c2 = am + ap;
        const StateVector phi1 = tensor({dn, (-c1 * tensor({up, up}) + c2 * tensor({dn, dn})).eval(), dn});
        const StateVector phi2 = tensor({dn, (c1 * tensor({up, dn}) + c2 * tensor({dn, up})).eval(), up});
        const StateVector phi3 = tensor({up, (c1 * tensor({dn, up}) + c2 * tensor({up, dn})).eval(), dn});
        const StateVector phi4 = tensor({up, (c1 * tensor({dn, dn}) - c2 * tensor({up, up})).eval(), up});

        std::vector<StateVector> out;
        out.push_back(ap * phi1 + am * phi2 + am * phi3 - ap * phi4);
        out.push_back(r * (phi1 + phi4));
        // relative minus sign: (phi2 + phi3) would overlap |0~> and |3~>
        out.push_back(r * (phi2 - phi3));
        out.push_back(am * phi1 - ap * phi2 - ap * phi3 - am * phi4);
        return out;
    }
    throw ConfigError("no analytic form");
}

}  // namespace usc
