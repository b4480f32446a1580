#include "usc/opcore.hpp"

#include <algorithm>
#include <cmath>

namespace usc {

char axis_name(Axis a) {
    switch (a) {
        case Axis::x: return 'x';
        case Axis::y: return 'y';
        case Axis::z: return 'z';
    }
    return '?';
}

Axis parse_axis(const std::string& s) {
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw ConfigError("bad axis '" + s + "'");
}

Operator identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return Operator::Identity(d, d);
}

Operator pauli(Axis a) {
    Operator p(2, 2);
    const cplx I(0.0, 1.0);
    switch (a) {
        case Axis::x: p << 0.0, 1.0, 1.0, 0.0; break;
        case Axis::y: p << 0.0, -I, I, 0.0; break;
        case Axis::z: p << 1.0, 0.0, 0.0, -1.0; break;
    }
    return p;
}

Operator kron(const Operator& a, const Operator& b, std::size_t max_dim) {
    const auto ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    if (static_cast<std::size_t>(ra * rb) > max_dim || static_cast<std::size_t>(ca * cb) > max_dim)
        throw ConfigError("dimension limit");
    Operator out(ra * rb, ca * cb);
    for (Eigen::Index i = 0; i < ra; ++i)
        for (Eigen::Index j = 0; j < ca; ++j)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    return out;
}

namespace {

void check_site(int site, int n_sites) {
    if (n_sites < 1 || n_sites > 12) throw ConfigError("dimension limit");
    if (site < 1 || site > n_sites) throw ConfigError("bad site");
}

}  // namespace

Operator site_pauli(Axis a, int site, int n_sites) {
    check_site(site, n_sites);
    Operator out = identity(1);
    for (int s = 1; s <= n_sites; ++s)
        out = kron(out, s == site ? pauli(a) : identity(2));
    return out;
}

StateVector apply_site_pauli(Axis a, int site, int n_sites, const StateVector& v) {
    check_site(site, n_sites);
    const std::size_t dim = std::size_t{1} << n_sites;
    if (static_cast<std::size_t>(v.size()) != dim) throw ConfigError("state dimension mismatch");
    // site 1 is the most significant bit of the basis index
    const std::size_t mask = std::size_t{1} << (n_sites - site);
    const cplx I(0.0, 1.0);
    StateVector out(v.size());
    for (std::size_t b = 0; b < dim; ++b) {
        const bool up = (b & mask) == 0;  // local |0>, sigma_z = +1
        const auto src = static_cast<Eigen::Index>(b ^ mask);
        const auto dst = static_cast<Eigen::Index>(b);
        switch (a) {
            case Axis::x: out(dst) = v(src); break;
            case Axis::y: out(dst) = (up ? -I : I) * v(src); break;
            case Axis::z: out(dst) = (up ? 1.0 : -1.0) * v(dst); break;
        }
    }
    return out;
}

Operator parity_operator(int n_sites) {
    if (n_sites < 1 || n_sites > 12) throw ConfigError("dimension limit");
    const std::size_t dim = std::size_t{1} << n_sites;
    Operator p = Operator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t b = 0; b < dim; ++b) {
        const int flips = __builtin_popcountll(b);
        p(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = (flips % 2 == 0) ? 1.0 : -1.0;
    }
    return p;
}

double max_abs(const Operator& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Operator& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = max_abs(a);
    return max_abs(a - a.adjoint()) <= rel_tol * scale;
}

std::vector<Cluster> clusters(const Eigen::VectorXd& v, double tol) {
    std::vector<Cluster> out;
    const auto n = static_cast<std::size_t>(v.size());
    std::size_t start = 0;
    for (std::size_t j = 1; j <= n; ++j) {
        if (j == n || v(static_cast<Eigen::Index>(j)) - v(static_cast<Eigen::Index>(j - 1)) >= tol) {
            out.push_back({start, j});
            start = j;
        }
    }
    return out;
}

double default_degeneracy_tol(const Operator& h) {
    return 1e-8 * std::max(1.0, max_abs(h));
}

void fix_gauge(StateVector& v) {
    if (v.size() == 0) return;
    const double top = v.cwiseAbs().maxCoeff();
    if (top == 0.0) return;
    Eigen::Index pick = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= top * (1.0 - 1e-9)) {
            pick = i;
            break;
        }
    }
    const cplx phase = std::conj(v(pick)) / std::abs(v(pick));
    v *= phase;
    v(pick) = std::abs(v(pick));
}

void fix_gauge(Operator& vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        StateVector col = vectors.col(j);
        fix_gauge(col);
        vectors.col(j) = col;
    }
}

Spectrum eigh(const Operator& h, double degeneracy_tol) {
    if (h.rows() != h.cols() || !is_hermitian(h)) throw NumericalError("not hermitian");
    if (static_cast<std::size_t>(h.rows()) > kMaxDim) throw ConfigError("dimension limit");
    // symmetrize so round-off in the input cannot leak into the solver
    const Operator hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> solver(hs);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    Spectrum s;
    s.eigenvalues = solver.eigenvalues();
    s.eigenvectors = solver.eigenvectors();
    s.degeneracy_tol = degeneracy_tol < 0.0 ? default_degeneracy_tol(h) : degeneracy_tol;
    fix_gauge(s.eigenvectors);
    return s;
}

Spectrum resolve_degeneracy(const Spectrum& s, const Operator& parity) {
    if (parity.rows() != static_cast<Eigen::Index>(s.dim()) || !is_hermitian(parity))
        throw ConfigError("parity operator must be Hermitian with matching dimension");
    Spectrum out = s;
    for (const Cluster& c : clusters(s.eigenvalues, s.degeneracy_tol)) {
        if (c.size() < 2) continue;
        const auto first = static_cast<Eigen::Index>(c.first);
        const auto k = static_cast<Eigen::Index>(c.size());
        const Operator block = s.eigenvectors.middleCols(first, k);
        const Operator pv = parity * block;
        const Operator projected = block.adjoint() * pv;
        if (max_abs(pv - block * projected) > 1e-8) throw NumericalError("parity mismatch");
        Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (projected + projected.adjoint()));
        // ascending parity eigenvalues; reverse so +1 comes first
        const Operator rot = solver.eigenvectors().rowwise().reverse();
        Operator rotated = block * rot;
        fix_gauge(rotated);
        out.eigenvectors.middleCols(first, k) = rotated;
    }
    return out;
}

}  // namespace usc
