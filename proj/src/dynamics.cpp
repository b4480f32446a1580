#include "usc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace usc {

SpectralDensity::SpectralDensity(double constant) : constant_(constant) {
    if (!(constant >= 0.0)) throw ConfigError("rates must be non-negative");
}

SpectralDensity::SpectralDensity(std::vector<double> omegas, std::vector<double> values)
    : table_omega_(std::move(omegas)), table_value_(std::move(values)) {
    if (table_omega_.size() != table_value_.size() || table_omega_.empty())
        throw ConfigError("spectral table needs matching non-empty columns");
    if (!std::is_sorted(table_omega_.begin(), table_omega_.end()))
        throw ConfigError("spectral table frequencies must ascend");
    for (double v : table_value_)
        if (!(v >= 0.0)) throw ConfigError("rates must be non-negative");
}

double SpectralDensity::operator()(double omega) const {
    if (table_omega_.empty()) return constant_;
    if (omega <= table_omega_.front()) return table_value_.front();
    if (omega >= table_omega_.back()) return table_value_.back();
    const auto hi = std::upper_bound(table_omega_.begin(), table_omega_.end(), omega);
    const auto j = static_cast<std::size_t>(hi - table_omega_.begin());
    const double w0 = table_omega_[j - 1], w1 = table_omega_[j];
    const double f = (omega - w0) / (w1 - w0);
    return (1.0 - f) * table_value_[j - 1] + f * table_value_[j];
}

NoiseModel NoiseModel::uniform(int n_sites, double gamma, double gamma_phi) {
    NoiseModel nm;
    for (Axis a : kAxes)
        for (int i = 1; i <= n_sites; ++i) {
            nm.gamma_relax[{a, i}] = SpectralDensity(gamma);
            nm.gamma_phi[{a, i}] = gamma_phi;
        }
    nm.validate();
    return nm;
}

void NoiseModel::validate() const {
    for (const auto& [c, g] : gamma_phi)
        if (!(g >= 0.0)) throw ConfigError("rates must be non-negative");
}

Operator to_matrix(const JumpOperator& j, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return std::visit(
        [d](const auto& jump) -> Operator {
            using T = std::decay_t<decltype(jump)>;
            Operator out = Operator::Zero(d, d);
            if constexpr (std::is_same_v<T, TransitionJump>) {
                out(static_cast<Eigen::Index>(jump.m), static_cast<Eigen::Index>(jump.n)) = 1.0;
            } else if constexpr (std::is_same_v<T, DiagonalJump>) {
                out.diagonal() = jump.d;
            } else {
                out = jump.op;
            }
            return out;
        },
        j);
}

namespace {

/// V^dagger sigma V for one channel.
Operator channel_matrix(const Spectrum& s, Axis a, int site, int n_sites) {
    Operator sv(s.eigenvectors.rows(), s.eigenvectors.cols());
    for (Eigen::Index j = 0; j < sv.cols(); ++j)
        sv.col(j) = apply_site_pauli(a, site, n_sites, s.eigenvectors.col(j));
    return s.eigenvectors.adjoint() * sv;
}

std::vector<int> cluster_labels(const Spectrum& s) {
    std::vector<int> label(s.dim());
    int c = 0;
    for (const Cluster& cl : clusters(s.eigenvalues, s.degeneracy_tol)) {
        for (std::size_t j = cl.first; j < cl.last; ++j) label[j] = c;
        ++c;
    }
    return label;
}

}  // namespace

std::vector<Dissipator> build_dissipators(const Spectrum& s, const NoiseModel& noise) {
    noise.validate();
    const int n_sites = sites_of(s);
    const std::size_t dim = s.dim();
    const auto label = cluster_labels(s);
    std::vector<Dissipator> out;
    for (Axis a : kAxes) {
        for (int i = 1; i <= n_sites; ++i) {
            const Channel ch{a, i};
            const bool want_relax = noise.enable_relaxation && noise.gamma_relax.contains(ch);
            const bool want_phi = noise.enable_dephasing && noise.gamma_phi.contains(ch);
            if (!want_relax && !want_phi) continue;
            const Operator S = channel_matrix(s, a, i, n_sites);
            if (want_relax) {
                const SpectralDensity& g = noise.gamma_relax.at(ch);
                for (std::size_t n = 1; n < dim; ++n) {
                    for (std::size_t m = 0; m < n; ++m) {
                        const double sr = std::norm(S(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)));
                        const double omega = s.eigenvalues(static_cast<Eigen::Index>(n)) -
                                             s.eigenvalues(static_cast<Eigen::Index>(m));
                        const double rate = g(omega) * sr;
                        if (rate == 0.0) continue;
                        out.push_back({TransitionJump{m, n}, rate, ch, label[m] == label[n]});
                    }
                }
            }
            if (want_phi) {
                const double gphi = noise.gamma_phi.at(ch);
                if (gphi > 0.0) out.push_back({DiagonalJump{S.diagonal()}, 0.5 * gphi, ch, false});
            }
        }
    }
    return out;
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    return {psi * psi.adjoint()};
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (entries + entries.adjoint()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

double DensityMatrix::hermiticity_error() const {
    return max_abs(entries - entries.adjoint());
}

namespace {

/// Liouvillian specialised to eigenbasis jumps, in the interaction picture of
/// the diagonal Hamiltonian (rho = P(t) .* r with P_ab = exp(-i (E_a - E_b) t)):
///   dr = D .* r + diag(G diag(r)) + conj(P) .* dense(P .* r)
/// The coherent phases are exact, so RK4 only integrates the dissipative part.
class Liouvillian {
public:
    Liouvillian(const Spectrum& s, const std::vector<Dissipator>& ds) : energies_(s.eigenvalues) {
        const auto d = static_cast<Eigen::Index>(s.dim());
        Eigen::VectorXd kappa = Eigen::VectorXd::Zero(d);
        gain_ = Eigen::MatrixXd::Zero(d, d);
        Operator phi = Operator::Zero(d, d);
        for (const Dissipator& x : ds) {
            if (x.rate < 0.0) throw ConfigError("rates must be non-negative");
            if (const auto* t = std::get_if<TransitionJump>(&x.jump)) {
                const auto m = static_cast<Eigen::Index>(t->m), n = static_cast<Eigen::Index>(t->n);
                if (m >= d || n >= d) throw ConfigError("index out of range");
                gain_(m, n) += x.rate;
                kappa(n) += x.rate;
            } else if (const auto* g = std::get_if<DiagonalJump>(&x.jump)) {
                for (Eigen::Index a = 0; a < d; ++a)
                    for (Eigen::Index b = 0; b < d; ++b)
                        phi(a, b) += x.rate * (g->d(a) * std::conj(g->d(b)) -
                                               0.5 * (std::norm(g->d(a)) + std::norm(g->d(b))));
            } else {
                const Operator& op = std::get<DenseJump>(x.jump).op;
                dense_.push_back({op, op.adjoint() * op, x.rate});
            }
        }
        coeff_.resize(d, d);
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b) coeff_(a, b) = -0.5 * (kappa(a) + kappa(b)) + phi(a, b);
        total_rate_ = kappa.sum();
        for (const auto& t : dense_) total_rate_ += t.rate * max_abs(t.ldl);
    }

    Operator phases(double t) const {
        const auto d = energies_.size();
        Operator p(d, d);
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b) p(a, b) = std::polar(1.0, -(energies_(a) - energies_(b)) * t);
        return p;
    }

    bool time_dependent() const { return !dense_.empty(); }

    /// `p` = phases(t); unused without dense jumps.
    Operator operator()(const Operator& r, const Operator& p) const {
        Operator out = coeff_.cwiseProduct(r);
        out.diagonal() += (gain_ * r.diagonal().real()).cast<cplx>();
        if (!dense_.empty()) {
            const Operator rho = p.cwiseProduct(r);
            Operator acc = Operator::Zero(r.rows(), r.cols());
            for (const auto& t : dense_)
                acc += t.rate * (t.l * rho * t.l.adjoint() - 0.5 * (t.ldl * rho + rho * t.ldl));
            out += p.conjugate().cwiseProduct(acc);
        }
        return out;
    }

    double total_rate() const { return total_rate_; }

private:
    struct DenseTerm {
        Operator l, ldl;
        double rate;
    };
    Eigen::VectorXd energies_;
    Operator coeff_;
    Eigen::MatrixXd gain_;
    std::vector<DenseTerm> dense_;
    double total_rate_ = 0.0;
};

}  // namespace

double default_time_step(const Spectrum& s, const std::vector<Dissipator>& ds) {
    const Liouvillian L(s, ds);
    const double emax = s.eigenvalues.cwiseAbs().maxCoeff();
    return 1e-2 / std::max({emax, L.total_rate(), 1e-300});
}

Trajectory evolve(const DensityMatrix& rho0, const Spectrum& s, const std::vector<Dissipator>& dissipators,
                  const EvolveOptions& opts) {
    if (rho0.dim() != s.dim()) throw ConfigError("density matrix dimension mismatch");
    if (!(opts.t_max >= 0.0)) throw ConfigError("t_max must be non-negative");
    if (opts.stride == 0) throw ConfigError("stride must be positive");
    const Liouvillian L(s, dissipators);
    double dt = opts.dt;
    if (dt <= 0.0) dt = default_time_step(s, dissipators);
    if (rho0.hermiticity_error() > 1e-10 || std::abs(rho0.trace() - 1.0) > 1e-8 || rho0.min_eigenvalue() < -1e-8)
        throw ConfigError("initial state is not a density matrix");

    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(opts.t_max / dt - 1e-9)));
    Trajectory tr;
    tr.dt = dt;
    tr.min_eigenvalue = rho0.min_eigenvalue();

    auto record = [&](std::size_t step, const Operator& rho) {
        DensityMatrix dm{rho};
        if (opts.check_invariants) {
            const double terr = std::abs(dm.trace() - 1.0);
            const double herr = dm.hermiticity_error();
            const double mine = dm.min_eigenvalue();
            tr.max_trace_error = std::max(tr.max_trace_error, terr);
            tr.min_eigenvalue = std::min(tr.min_eigenvalue, mine);
            if (terr > 1e-8 || herr > 1e-10 || mine < -1e-8) {
                std::ostringstream msg;
                msg << "integrator failure at step " << step << " (t=" << step * dt << "): trace error " << terr
                    << ", hermiticity error " << herr << ", min eigenvalue " << mine;
                throw NumericalError(msg.str());
            }
        }
        tr.times.push_back(static_cast<double>(step) * dt);
        tr.states.push_back(std::move(dm));
    };

    Operator r = rho0.entries;
    record(0, r);
    const bool td = L.time_dependent();
    Operator p0, ph, p1;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k - 1) * dt;
        if (td) {
            p0 = L.phases(t);
            ph = L.phases(t + 0.5 * dt);
            p1 = L.phases(t + dt);
        }
        const Operator k1 = L(r, p0);
        const Operator k2 = L(r + 0.5 * dt * k1, ph);
        const Operator k3 = L(r + 0.5 * dt * k2, ph);
        const Operator k4 = L(r + dt * k3, p1);
        r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (k % opts.stride == 0 || k == steps) record(k, L.phases(static_cast<double>(k) * dt).cwiseProduct(r));
    }
    return tr;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 10) throw ConfigError("bad series");
    for (double v : y)
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("bad series");
    const auto n = static_cast<double>(t.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double l = std::log(y[i]);
        st += t[i];
        sl += l;
        stt += t[i] * t[i];
        stl += t[i] * l;
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) throw ConfigError("bad series");
    const double slope = (n * stl - st * sl) / denom;
    const double intercept = (sl - slope * st) / n;
    RateFit f;
    f.rate = -slope;
    f.amplitude = std::exp(intercept);
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double rel = (y[i] - f.amplitude * std::exp(-f.rate * t[i])) / y[i];
        ss += rel * rel;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

double predicted_dephasing_rate(const Spectrum& s, const NoiseModel& noise, std::size_t m, std::size_t n) {
    double rate = 0.0;
    for (const auto& [ch, g] : noise.gamma_phi) rate += g * dephasing_susceptibility(s, ch.axis, ch.site, m, n);
    return rate;
}

double predicted_relaxation_rate(const Spectrum& s, const NoiseModel& noise, std::size_t m, std::size_t n) {
    const double omega = std::abs(s.eigenvalues(static_cast<Eigen::Index>(n)) - s.eigenvalues(static_cast<Eigen::Index>(m)));
    double rate = 0.0;
    for (const auto& [ch, g] : noise.gamma_relax) rate += g(omega) * relaxation_susceptibility(s, ch.axis, ch.site, m, n);
    return rate;
}

}  // namespace usc
