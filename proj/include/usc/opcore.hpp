// opcore.hpp - dense complex operator algebra for spin chains
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace usc {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Bad input or configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not meet its contract (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Axis { x, y, z };

inline constexpr Axis kAxes[3] = {Axis::x, Axis::y, Axis::z};

char axis_name(Axis a);
Axis parse_axis(const std::string& s);

/// Largest Hilbert-space dimension any routine will build (N <= 12 sites).
inline constexpr std::size_t kMaxDim = std::size_t{1} << 12;

Operator identity(std::size_t dim);
Operator pauli(Axis a);

/// Kronecker product, left factor most significant.
Operator kron(const Operator& a, const Operator& b, std::size_t max_dim = kMaxDim);

/// sigma_k on site `site` (1-based, site 1 = leftmost factor) of an n-site chain.
Operator site_pauli(Axis a, int site, int n_sites);

/// Applies sigma_k^(site) to a state without forming the operator.
StateVector apply_site_pauli(Axis a, int site, int n_sites, const StateVector& v);

/// Product of sigma_z over every site.
Operator parity_operator(int n_sites);

double max_abs(const Operator& a);
bool is_hermitian(const Operator& a, double rel_tol = 1e-12);

/// Ordered eigenpairs of a Hermitian operator.
///
/// Columns of `eigenvectors` are gauge fixed: in each column the entry of
/// largest magnitude is real and non-negative (ties go to the lowest index).
struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Operator eigenvectors;
    double degeneracy_tol = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
    StateVector state(std::size_t j) const { return eigenvectors.col(static_cast<Eigen::Index>(j)); }
};

/// Half-open index ranges [first, last) of eigenvalues whose neighbours are
/// closer than `tol`.
struct Cluster {
    std::size_t first;
    std::size_t last;
    std::size_t size() const { return last - first; }
};
std::vector<Cluster> clusters(const Eigen::VectorXd& sorted_values, double tol);

double default_degeneracy_tol(const Operator& h);

/// Hermitian eigendecomposition. A negative `degeneracy_tol` selects
/// default_degeneracy_tol(h).
Spectrum eigh(const Operator& h, double degeneracy_tol = -1.0);

/// Rotates every degenerate cluster onto eigenvectors of `parity`
/// (parity +1 first inside a cluster).
Spectrum resolve_degeneracy(const Spectrum& s, const Operator& parity);

/// Applies the gauge rule to each column in place.
void fix_gauge(Operator& vectors);
void fix_gauge(StateVector& v);

}  // namespace usc
