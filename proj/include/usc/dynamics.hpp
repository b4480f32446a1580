// dynamics.hpp - dressed-basis Lindblad master equation
//
// All operators live in the eigenbasis of the chain Hamiltonian. Relaxation
// jumps |m><n| (n > m, zero temperature) carry rates gamma(omega_nm) S^R(m,n);
// each channel also contributes one dephasing jump sum_m S(m,m)|m><m| at rate
// gamma_phi / 2.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <variant>
#include <vector>

#include "usc/noise.hpp"

namespace usc {

/// Bath spectral weight gamma(omega). Constant unless a table is supplied,
/// in which case values are linearly interpolated and clamped at the ends.
class SpectralDensity {
public:
    SpectralDensity() = default;
    explicit SpectralDensity(double constant);
    SpectralDensity(std::vector<double> omegas, std::vector<double> values);

    double operator()(double omega) const;
    bool is_constant() const { return table_omega_.empty(); }

private:
    double constant_ = 0.0;
    std::vector<double> table_omega_;
    std::vector<double> table_value_;
};

struct NoiseModel {
    std::map<Channel, SpectralDensity> gamma_relax;
    std::map<Channel, double> gamma_phi;
    bool enable_relaxation = true;
    bool enable_dephasing = true;

    /// Same rates on every (axis, site) channel of an n-site chain.
    static NoiseModel uniform(int n_sites, double gamma, double gamma_phi);
    void validate() const;
};

/// |m><n|
struct TransitionJump {
    std::size_t m;
    std::size_t n;
};
/// sum_m d_m |m><m|
struct DiagonalJump {
    Eigen::VectorXcd d;
};
struct DenseJump {
    Operator op;
};
using JumpOperator = std::variant<TransitionJump, DiagonalJump, DenseJump>;

Operator to_matrix(const JumpOperator& j, std::size_t dim);

struct Dissipator {
    JumpOperator jump;
    double rate = 0.0;
    Channel channel;
    /// Transition inside a cluster closer than the spectrum's degeneracy_tol,
    /// where a physical bath would not be flat.
    bool quasi_degenerate = false;
};

std::vector<Dissipator> build_dissipators(const Spectrum& s, const NoiseModel& noise);

/// Density matrix in the eigenbasis of the Hamiltonian.
struct DensityMatrix {
    Operator entries;

    static DensityMatrix pure(const StateVector& psi);
    std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
    double trace() const { return entries.trace().real(); }
    double min_eigenvalue() const;
    double hermiticity_error() const;
};

struct EvolveOptions {
    double t_max = 100.0;
    /// <= 0 selects 1e-2 / max(max|E|, total rate)
    double dt = 0.0;
    /// Record every `stride`-th step (the initial state is always recorded).
    std::size_t stride = 1;
    bool check_invariants = true;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double dt = 0.0;
    double max_trace_error = 0.0;
    double min_eigenvalue = 0.0;
};

double default_time_step(const Spectrum& s, const std::vector<Dissipator>& d);

/// Fixed-step RK4 on the dissipative part of the Liouvillian, with the
/// coherent phases applied exactly. Throws NumericalError("integrator
/// failure ...") when a recorded state violates the density-matrix bounds.
Trajectory evolve(const DensityMatrix& rho0, const Spectrum& s, const std::vector<Dissipator>& dissipators,
                  const EvolveOptions& opts);

struct RateFit {
    double amplitude = 0.0;
    double rate = 0.0;
    double residual = 0.0;  // RMS relative deviation of the fit
};

/// Least squares a exp(-rate t) on log data. Needs >= 10 positive samples.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& y);

/// Sum over channels of gamma_phi S^phi(m,n) and gamma(omega) S^R(m,n).
double predicted_dephasing_rate(const Spectrum& s, const NoiseModel& noise, std::size_t m, std::size_t n);
double predicted_relaxation_rate(const Spectrum& s, const NoiseModel& noise, std::size_t m, std::size_t n);

}  // namespace usc
