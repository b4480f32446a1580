// gates.hpp - logical X/Y/Z gates and the two-chain sqrt(iSWAP)
//
// Propagation keeps the full cosine drive (no rotating-wave approximation)
// and integrates with fixed-step RK4 in the interaction picture of the
// undriven chain, which keeps the norm error at round-off. Realized logical maps are compared with their targets in the frame
// rotating with the unperturbed logical-qubit energies.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "usc/models.hpp"
#include "usc/noise.hpp"

namespace usc {

enum class Envelope { flat, gaussian };

/// A cos(omega_d t + phase) f(t) sigma_axis^(site); gaussian envelopes use
/// sigma = duration / 6 centred on the pulse and truncated at +-3 sigma.
struct DrivePulse {
    int target_site = 1;
    Axis drive_axis = Axis::x;
    double amplitude = 0.02;
    double carrier_freq = 1.0;
    double phase = 0.0;
    Envelope envelope = Envelope::gaussian;
    double duration = 0.0;

    double envelope_at(double t) const;
    /// Integral of the envelope over [0, duration].
    double envelope_area() const;
};

/// omega_q(site) -> omega_q(site) + detuning f(t) with sin^2 ramps of length
/// ramp_time at both ends of hold_time.
struct FrequencyPulse {
    int target_site = 1;
    double detuning = -0.1;
    double hold_time = 0.0;
    double ramp_time = 20.0;

    double envelope_at(double t) const;
};

using PulseSchedule = std::variant<DrivePulse, FrequencyPulse>;

double pulse_duration(const PulseSchedule& p);

struct PropagationOptions {
    /// <= 0 selects (1/40) 2 pi / (level spread + carrier frequency)
    double dt = 0.0;
    std::size_t stride = 1;
};

struct StateTrajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    double max_norm_error = 0.0;
};

/// Solves i psi' = [H + drive(t)] psi from psi0 (computational basis).
StateTrajectory run_pulse(const ChainSpec& spec, const PulseSchedule& pulse, const StateVector& psi0,
                          const PropagationOptions& opts = {});

/// Logical-subspace map P U P in the rotating frame of the logical qubit.
struct LogicalMap {
    Operator map;
    double max_norm_error = 0.0;
};
LogicalMap single_qubit_logical_map(const ChainSpec& spec, const PulseSchedule& pulse,
                                    const PropagationOptions& opts = {});

struct FidelityEstimate {
    double avg_fidelity = 0.0;
    double leakage = 0.0;
    std::size_t trials = 0;
};

/// Mean over Haar-random logical states of |<psi|V^dag M|psi>|^2; trial j uses
/// seed + j.
FidelityEstimate average_fidelity(const Operator& target, const Operator& realized, std::size_t trials,
                                  std::uint64_t seed);

/// (|Tr V^dag M|^2 + Tr M^dag M) / (d (d + 1)), the exact Haar average.
double average_fidelity_exact(const Operator& target, const Operator& realized);

/// Haar-random normalized state of dimension d.
StateVector haar_state(std::size_t d, std::uint64_t seed);

struct GateResult {
    std::string name;
    Operator logical_unitary;
    double leakage = 0.0;
    double avg_fidelity = 0.0;
    double exact_fidelity = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> calibration;
};

Operator gate_matrix(const std::string& name);

struct SingleQubitGateConfig {
    int site = 1;
    Axis drive_axis = Axis::x;
    double amplitude = 0.02;
    Envelope envelope = Envelope::gaussian;
    std::size_t trials = 200;
    std::uint64_t seed = 1234;
    PropagationOptions propagation;
};

/// Numerically calibrated pi pulse realising X or Y on the logical qubit.
/// The carrier phase selects the rotation axis; amplitude scale and drive
/// frequency are optimised.
GateResult calibrate_xy_gate(const ChainSpec& spec, char gate, const SingleQubitGateConfig& cfg,
                             DrivePulse* pulse_out = nullptr);

struct ZGateConfig {
    int site = 1;
    double detuning = -0.1;
    double ramp_time = 20.0;
    std::size_t trials = 200;
    std::uint64_t seed = 1234;
    PropagationOptions propagation;
};

/// Hold time calibrated so the logical relative phase reaches pi.
GateResult calibrate_z_gate(const ChainSpec& spec, const ZGateConfig& cfg, FrequencyPulse* pulse_out = nullptr);

struct ZCurvePoint {
    double omega_q1;
    double omega10;
    double domega10;
};

/// omega10 against the frequency of site `site`, derivative by central
/// differences of step `h`.
std::vector<ZCurvePoint> z_gate_curve(const ChainSpec& spec, const std::vector<double>& omega_grid, int site = 1,
                                       double h = 1e-4);

struct TwoQubitConfig {
    double g_xx = 0.01;
    int site_a = 1;
    int site_b = 1;
    double threshold = 0.999;
    /// Search window in units of 1 / g_eff.
    double window = 10.0;
    /// Samples per pi / (4 g_eff) while scanning.
    std::size_t samples_per_gate_time = 1000;
    std::size_t trials = 200;
    std::uint64_t seed = 1234;
    PropagationOptions propagation;
};

/// Logical 4x4 map of two chains coupled by -g sigma_x^(a) sigma_x^(b) after
/// `duration`, in the product basis |00>,|01>,|10>,|11> (chain A first),
/// rotating frame of the uncoupled logical qubits.
LogicalMap two_qubit_logical_map(const ChainSpec& a, const ChainSpec& b, double g_xx, int site_a, int site_b,
                                 double duration, const PropagationOptions& opts = {});

struct ZFrameResult {
    Operator corrected;
    /// d = 2: (post, pre); d = 4: (post_a, post_b, pre_a, pre_b)
    std::vector<double> angles;
    double fidelity = 0.0;
};

/// Z(a) = diag(1, e^{ia}) on each logical qubit. Maximises the exact average
/// fidelity of Z_post M Z_pre; an empty guess triggers a multi-start search.
ZFrameResult optimize_z_frames(const Operator& target, const Operator& realized,
                               const std::vector<double>& guess = {});
Operator z_frame(const std::vector<double>& angles, std::size_t dim, bool post);

GateResult sqrt_iswap(const ChainSpec& a, const ChainSpec& b, const TwoQubitConfig& cfg);

}  // namespace usc
