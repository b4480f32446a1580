#include "usc/circuit.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace usc {

void CircuitParams::validate() const {
    for (double v : {alpha, beta, gamma_cap, ej_ec, ejg_ej, phi_ext, charge_energy_factor})
        if (!std::isfinite(v)) throw ConfigError("circuit parameters must be finite");
    if (alpha < 0.0 || beta < 0.0 || gamma_cap < 0.0 || ej_ec < 0.0 || ejg_ej < 0.0)
        throw ConfigError("circuit ratios must be non-negative");
    if (!(charge_energy_factor > 0.0)) throw ConfigError("charge_energy_factor must be positive");
    if (charge_cutoff < 5 || charge_cutoff > 30) throw ConfigError("charge_cutoff must lie in [5, 30]");
    const int dim = (2 * charge_cutoff + 1) * (2 * charge_cutoff + 1);
    if (levels < 4 || levels > dim) throw ConfigError("levels must be at least 4");
}

Eigen::Matrix2d qubit_capacitance(const CircuitParams& p) {
    const double s = p.alpha + p.beta;
    Eigen::Matrix2d c;
    c << 1.0 + s, -s, -s, 1.0 + s;
    return c;
}

Eigen::MatrixXd capacitance_matrix(const CircuitParams& p) {
    p.validate();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(6, 6);
    const Eigen::Matrix2d q = qubit_capacitance(p);
    for (int k = 0; k < 3; ++k) c.block<2, 2>(2 * k, 2 * k) = q;
    c(3, 3) += p.gamma_cap;
    c(4, 4) += p.gamma_cap;
    c(3, 4) -= p.gamma_cap;
    c(4, 3) -= p.gamma_cap;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw ConfigError("bad capacitance");
    return c;
}

InverseBlocks inverse_blocks(const Eigen::MatrixXd& ctilde) {
    if (ctilde.rows() != 6 || ctilde.cols() != 6) throw ConfigError("capacitance matrix must be 6x6");
    Eigen::LLT<Eigen::MatrixXd> llt(ctilde);
    if (llt.info() != Eigen::Success) throw NumericalError("singular capacitance matrix");
    InverseBlocks b;
    b.inverse = llt.solve(Eigen::MatrixXd::Identity(6, 6));
    b.inverse = 0.5 * (b.inverse + b.inverse.transpose()).eval();
    for (int k = 0; k < 3; ++k) b.qubit[static_cast<std::size_t>(k)] = b.inverse.block<2, 2>(2 * k, 2 * k);
    b.coupling = b.inverse.block<2, 2>(2, 4);
    return b;
}

namespace {

struct ChargeBasis {
    int nmax;
    int d;
    Eigen::Index size() const { return static_cast<Eigen::Index>(d) * d; }
    Eigen::Index index(int n1, int n2) const { return static_cast<Eigen::Index>(n1 + nmax) * d + (n2 + nmax); }
    bool inside(int n) const { return n >= -nmax && n <= nmax; }
};

/// e^{i phi_node} |n1, n2> = |n1 + 1, n2> (node 0) or |n1, n2 + 1> (node 1)
StateVector raise(const ChargeBasis& b, int node, const StateVector& v) {
    StateVector out = StateVector::Zero(v.size());
    for (int n1 = -b.nmax; n1 <= b.nmax; ++n1)
        for (int n2 = -b.nmax; n2 <= b.nmax; ++n2) {
            const int m1 = n1 + (node == 0), m2 = n2 + (node == 1);
            if (b.inside(m1) && b.inside(m2)) out(b.index(m1, m2)) = v(b.index(n1, n2));
        }
    return out;
}

StateVector lower(const ChargeBasis& b, int node, const StateVector& v) {
    StateVector out = StateVector::Zero(v.size());
    for (int n1 = -b.nmax; n1 <= b.nmax; ++n1)
        for (int n2 = -b.nmax; n2 <= b.nmax; ++n2) {
            const int m1 = n1 - (node == 0), m2 = n2 - (node == 1);
            if (b.inside(m1) && b.inside(m2)) out(b.index(m1, m2)) = v(b.index(n1, n2));
        }
    return out;
}

StateVector charge(const ChargeBasis& b, int node, const StateVector& v) {
    StateVector out(v.size());
    for (int n1 = -b.nmax; n1 <= b.nmax; ++n1)
        for (int n2 = -b.nmax; n2 <= b.nmax; ++n2)
            out(b.index(n1, n2)) = static_cast<double>(node == 0 ? n1 : n2) * v(b.index(n1, n2));
    return out;
}

Operator qubit_hamiltonian(const CircuitParams& p, const Eigen::Matrix2d& k, const ChargeBasis& b) {
    Operator h = Operator::Zero(b.size(), b.size());
    const double f = p.charge_energy_factor;
    const double ej = p.ej_ec;
    const cplx flux = std::polar(1.0, -p.phi_ext);
    for (int n1 = -b.nmax; n1 <= b.nmax; ++n1)
        for (int n2 = -b.nmax; n2 <= b.nmax; ++n2) {
            const Eigen::Index i = b.index(n1, n2);
            h(i, i) = f * (k(0, 0) * n1 * n1 + 2.0 * k(0, 1) * n1 * n2 + k(1, 1) * n2 * n2);
            if (b.inside(n1 + 1)) {
                h(b.index(n1 + 1, n2), i) += -0.5 * ej;
                h(i, b.index(n1 + 1, n2)) += -0.5 * ej;
            }
            if (b.inside(n2 + 1)) {
                h(b.index(n1, n2 + 1), i) += -0.5 * ej;
                h(i, b.index(n1, n2 + 1)) += -0.5 * ej;
            }
            // alpha cos(phi' - phi - phi_ext): e^{i(phi' - phi)} |n1, n2> = |n1 - 1, n2 + 1>
            if (b.inside(n1 - 1) && b.inside(n2 + 1)) {
                const Eigen::Index j = b.index(n1 - 1, n2 + 1);
                h(j, i) += -0.5 * ej * p.alpha * flux;
                h(i, j) += -0.5 * ej * p.alpha * std::conj(flux);
            }
        }
    return h;
}

QubitLevels diagonalize(const CircuitParams& p, const Eigen::Matrix2d& k, int nmax) {
    const ChargeBasis b{nmax, 2 * nmax + 1};
    const Spectrum s = eigh(qubit_hamiltonian(p, k, b));
    const auto levels = static_cast<Eigen::Index>(p.levels);
    QubitLevels q;
    q.energies = s.eigenvalues.head(levels);
    const Operator v = s.eigenvectors.leftCols(levels);
    Operator n1(b.size(), levels), n2(b.size(), levels), r1(b.size(), levels), r2(b.size(), levels),
        l1(b.size(), levels), l2(b.size(), levels);
    for (Eigen::Index c = 0; c < levels; ++c) {
        const StateVector col = v.col(c);
        n1.col(c) = charge(b, 0, col);
        n2.col(c) = charge(b, 1, col);
        r1.col(c) = raise(b, 0, col);
        r2.col(c) = raise(b, 1, col);
        l1.col(c) = lower(b, 0, col);
        l2.col(c) = lower(b, 1, col);
    }
    const Operator vh = v.adjoint();
    const cplx i2(0.0, 2.0);
    q.ops["n1"] = vh * n1;
    q.ops["n2"] = vh * n2;
    q.ops["cos1"] = vh * (r1 + l1) / 2.0;
    q.ops["sin1"] = vh * (r1 - l1) / i2;
    q.ops["cos2"] = vh * (r2 + l2) / 2.0;
    q.ops["sin2"] = vh * (r2 - l2) / i2;
    return q;
}

/// Coefficients (I, x, y, z) of the two-level block of m after |e> -> e^{i theta}|e>.
Eigen::Vector4cd pauli_coefficients(const Operator& m, double theta) {
    const cplx u = std::polar(1.0, theta);
    const cplx m00 = m(0, 0), m11 = m(1, 1), m01 = m(0, 1) * u, m10 = m(1, 0) * std::conj(u);
    Eigen::Vector4cd a;
    a << 0.5 * (m00 + m11), 0.5 * (m01 + m10), 0.5 * cplx(0.0, 1.0) * (m01 - m10), 0.5 * (m00 - m11);
    return a;
}

struct Term {
    const Operator* a;
    const Operator* b;
    double coef;
};

CouplingTensor tensor(const std::vector<Term>& terms, double theta_a, double theta_b, double& max_imag) {
    Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
    for (const Term& t : terms)
        acc += t.coef * pauli_coefficients(*t.a, theta_a) * pauli_coefficients(*t.b, theta_b).transpose();
    max_imag = std::max(max_imag, acc.imag().cwiseAbs().maxCoeff());
    CouplingTensor out;
    out.full = acc.real();
    return out;
}

/// E11 - E10 - E01 + E00 at second order, virtual states outside the
/// computational block.
double second_order_zz(const std::vector<Term>& terms, const Eigen::VectorXd& ea, const Eigen::VectorXd& eb) {
    const Eigen::Index la = ea.size(), lb = eb.size();
    Operator v = Operator::Zero(la * lb, la * lb);
    for (const Term& t : terms) v += t.coef * kron(*t.a, *t.b);
    auto shift = [&](Eigen::Index i, Eigen::Index j) {
        double e2 = 0.0;
        const Eigen::Index col = i * lb + j;
        for (Eigen::Index k = 0; k < la; ++k)
            for (Eigen::Index l = 0; l < lb; ++l) {
                if (k < 2 && l < 2) continue;
                const double den = ea(i) + eb(j) - ea(k) - eb(l);
                const double num = std::norm(v(k * lb + l, col));
                if (num == 0.0) continue;
                if (std::abs(den) < 1e-9) throw NumericalError("resonant virtual level in zz estimate");
                e2 += num / den;
            }
        return e2;
    };
    return shift(1, 1) - shift(1, 0) - shift(0, 1) + shift(0, 0);
}

double junction_frame(const QubitLevels& q) {
    const cplx s1 = q.ops.at("sin1")(0, 1), s2 = q.ops.at("sin2")(0, 1);
    const cplx s = std::abs(s1) >= std::abs(s2) ? s1 : s2;
    return std::abs(s) > 1e-14 ? -std::arg(s) : 0.0;
}

}  // namespace

QubitLevels flux_qubit_levels(const CircuitParams& p, const Eigen::Matrix2d& inv_block, bool check_convergence) {
    p.validate();
    QubitLevels q = diagonalize(p, inv_block, p.charge_cutoff);
    if (check_convergence) {
        const QubitLevels r = diagonalize(p, inv_block, p.charge_cutoff + 2);
        for (Eigen::Index k = 0; k < q.energies.size(); ++k)
            q.convergence = std::max(q.convergence, std::abs(q.energies(k) - r.energies(k)) /
                                                        std::max(std::abs(q.energies(k)), 1.0));
        if (q.convergence > 1e-6)
            throw NumericalError("cutoff too small: relative level shift " + std::to_string(q.convergence));
    }
    return q;
}

SpinModel truncate_to_spins(const CircuitParams& p) {
    const InverseBlocks inv = inverse_blocks(capacitance_matrix(p));
    std::array<QubitLevels, 3> q;
    for (std::size_t k = 0; k < 3; ++k) q[k] = flux_qubit_levels(p, inv.qubit[k]);

    SpinModel out;
    out.charge_cutoff = p.charge_cutoff;
    for (std::size_t k = 0; k < 3; ++k) {
        out.omega_q[k] = q[k].energies(1) - q[k].energies(0);
        out.frame_angle[k] = junction_frame(q[k]);
        out.convergence[k] = q[k].convergence;
    }

    const double ejg = p.ejg_ej * p.ej_ec;
    // -E_Jg cos(phi2 - phi1') = -E_Jg (cos phi1' cos phi2 + sin phi1' sin phi2)
    const std::vector<Term> jj = {{&q[0].ops.at("cos2"), &q[1].ops.at("cos1"), -ejg},
                                  {&q[0].ops.at("sin2"), &q[1].ops.at("sin1"), -ejg}};
    // Q2^T B Q3 with Q = 2e n and (2e)^2 / C = 2 factor E_C
    const double qq = 2.0 * p.charge_energy_factor;
    const char* nodes[2] = {"n1", "n2"};
    std::vector<Term> cap;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            cap.push_back({&q[1].ops.at(nodes[a]), &q[2].ops.at(nodes[b]), qq * inv.coupling(a, b)});

    out.g_jj = tensor(jj, out.frame_angle[0], out.frame_angle[1], out.max_imag);
    out.g_c = tensor(cap, out.frame_angle[1], out.frame_angle[2], out.max_imag);
    out.zz_jj = second_order_zz(jj, q[0].energies, q[1].energies);
    out.zz_c = second_order_zz(cap, q[1].energies, q[2].energies);
    return out;
}

}  // namespace usc
