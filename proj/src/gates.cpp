#include "usc/gates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "usc/optimize.hpp"

namespace usc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNormTol = 1e-8;

double wrap_phase(double x) { return std::remainder(x, 2.0 * kPi); }

/// Chain operator sigma^(site) expressed in the chain eigenbasis.
Operator eigenbasis_operator(const Spectrum& s, Axis a, int site) {
    const int n = sites_of(s);
    Operator sv(s.dim(), s.dim());
    for (std::size_t j = 0; j < s.dim(); ++j)
        sv.col(static_cast<Eigen::Index>(j)) = apply_site_pauli(a, site, n, s.state(j));
    return s.eigenvectors.adjoint() * sv;
}

/// 40 steps per period of the fastest interaction-picture phase, the level
/// spread plus the carrier frequency.
double default_dt(const Eigen::VectorXd& e, double omega_drive = 0.0) {
    const double range = e.maxCoeff() - e.minCoeff() + std::abs(omega_drive);
    return range > 0.0 ? (1.0 / 40.0) * 2.0 * kPi / range : 0.05;
}

/// Integrates y' = -i c(t) e^{iEt} D e^{-iEt} y over [0, T], i.e. the
/// Schroedinger equation for diag(E) + c(t) D in the interaction picture.
/// `record(t, y)` is called every `stride` steps and at t = T.
template <class Coef, class Record>
Operator interaction_rk4(const Eigen::VectorXd& e, const Operator& d, Coef coef, Operator y, double duration,
                         double dt_req, std::size_t stride, Record record, double* norm_err) {
    if (!(duration > 0.0)) throw ConfigError("pulse duration must be positive");
    const double dt0 = dt_req > 0.0 ? dt_req : default_dt(e);
    const auto steps = static_cast<std::size_t>(std::ceil(duration / dt0));
    const double dt = duration / static_cast<double>(steps);
    const Eigen::Index dim = e.size();
    const Eigen::ArrayXcd half = (cplx(0.0, 0.5 * dt) * e.array().cast<cplx>()).exp();

    Eigen::ArrayXcd ph = Eigen::ArrayXcd::Ones(dim);
    auto rhs = [&](double t, const Eigen::ArrayXcd& p, const Operator& v) -> Operator {
        const double c = coef(t);
        if (c == 0.0) return Operator::Zero(v.rows(), v.cols());
        const Operator w = p.conjugate().matrix().asDiagonal() * v;
        return cplx(0.0, -c) * (p.matrix().asDiagonal() * (d * w));
    };

    double worst = 0.0;
    record(0.0, y);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (k % 1024 == 0) ph = (cplx(0.0, t) * e.array().cast<cplx>()).exp();
        const Eigen::ArrayXcd pm = ph * half;
        const Eigen::ArrayXcd pe = pm * half;
        const Operator k1 = rhs(t, ph, y);
        const Operator k2 = rhs(t + 0.5 * dt, pm, y + 0.5 * dt * k1);
        const Operator k3 = rhs(t + 0.5 * dt, pm, y + 0.5 * dt * k2);
        const Operator k4 = rhs(t + dt, pe, y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ph = pe;
        for (Eigen::Index c = 0; c < y.cols(); ++c) worst = std::max(worst, std::abs(y.col(c).norm() - 1.0));
        if (!std::isfinite(worst) || worst > kNormTol)
            throw NumericalError("propagator failure at step " + std::to_string(k + 1) +
                                 ": norm error " + std::to_string(worst));
        if ((k + 1) % stride == 0 || k + 1 == steps) record(static_cast<double>(k + 1) * dt, y);
    }
    if (norm_err) *norm_err = worst;
    return y;
}

struct PulseModel {
    Operator d;
    std::function<double(double)> coef;
    double duration;
    double omega_drive = 0.0;
};

PulseModel pulse_model(const Spectrum& s, const PulseSchedule& pulse) {
    if (const auto* p = std::get_if<DrivePulse>(&pulse)) {
        if (p->amplitude < 0.0) throw ConfigError("drive amplitude must be non-negative");
        if (p->drive_axis == Axis::z) throw ConfigError("drive axis must be x or y");
        DrivePulse q = *p;
        return {eigenbasis_operator(s, q.drive_axis, q.target_site),
                [q](double t) { return q.amplitude * q.envelope_at(t) * std::cos(q.carrier_freq * t + q.phase); },
                q.duration, q.carrier_freq};
    }
    const auto& z = std::get<FrequencyPulse>(pulse);
    if (z.hold_time < 0.0 || z.ramp_time < 0.0) throw ConfigError("negative hold or ramp time");
    FrequencyPulse q = z;
    // omega -> omega + delta adds -delta/2 sigma_z
    return {eigenbasis_operator(s, Axis::z, q.target_site),
            [q](double t) { return -0.5 * q.detuning * q.envelope_at(t); }, pulse_duration(pulse)};
}

}  // namespace

double DrivePulse::envelope_at(double t) const {
    if (t < 0.0 || t > duration) return 0.0;
    if (envelope == Envelope::flat) return 1.0;
    const double sigma = duration / 6.0;
    const double u = (t - 0.5 * duration) / sigma;
    return std::exp(-0.5 * u * u);
}

double DrivePulse::envelope_area() const {
    if (envelope == Envelope::flat) return duration;
    const double sigma = duration / 6.0;
    return sigma * std::sqrt(2.0 * kPi) * std::erf(3.0 / std::sqrt(2.0));
}

double FrequencyPulse::envelope_at(double t) const {
    const double total = hold_time + 2.0 * ramp_time;
    if (t < 0.0 || t > total) return 0.0;
    if (ramp_time > 0.0 && t < ramp_time) return std::pow(std::sin(0.5 * kPi * t / ramp_time), 2);
    if (ramp_time > 0.0 && t > ramp_time + hold_time)
        return std::pow(std::sin(0.5 * kPi * (total - t) / ramp_time), 2);
    return 1.0;
}

double pulse_duration(const PulseSchedule& p) {
    if (const auto* d = std::get_if<DrivePulse>(&p)) return d->duration;
    const auto& z = std::get<FrequencyPulse>(p);
    return z.hold_time + 2.0 * z.ramp_time;
}

StateTrajectory run_pulse(const ChainSpec& spec, const PulseSchedule& pulse, const StateVector& psi0,
                          const PropagationOptions& opts) {
    const Spectrum s = chain_spectrum(spec);
    if (static_cast<std::size_t>(psi0.size()) != s.dim()) throw ConfigError("state dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > kNormTol) throw ConfigError("initial state is not normalized");
    const PulseModel pm = pulse_model(s, pulse);
    const double shift = 0.5 * (s.eigenvalues.maxCoeff() + s.eigenvalues.minCoeff());
    const Eigen::VectorXd e = s.eigenvalues.array() - shift;

    StateTrajectory out;
    auto record = [&](double t, const Operator& y) {
        const Eigen::ArrayXcd back = (cplx(0.0, -t) * s.eigenvalues.array().cast<cplx>()).exp();
        out.times.push_back(t);
        out.states.push_back(s.eigenvectors * (back.matrix().asDiagonal() * y.col(0)));
    };
    const Operator y0 = s.eigenvectors.adjoint() * psi0;
    interaction_rk4(e, pm.d, pm.coef, y0, pm.duration, opts.dt > 0.0 ? opts.dt : default_dt(e, pm.omega_drive), std::max<std::size_t>(opts.stride, 1), record,
                    &out.max_norm_error);
    return out;
}

LogicalMap single_qubit_logical_map(const ChainSpec& spec, const PulseSchedule& pulse,
                                    const PropagationOptions& opts) {
    const Spectrum s = chain_spectrum(spec);
    const PulseModel pm = pulse_model(s, pulse);
    const double shift = 0.5 * (s.eigenvalues.maxCoeff() + s.eigenvalues.minCoeff());
    const Eigen::VectorXd e = s.eigenvalues.array() - shift;
    const Operator y0 = Operator::Identity(static_cast<Eigen::Index>(s.dim()), 2);
    LogicalMap out;
    // In the interaction picture the logical block of y is already the map in
    // the frame rotating with the unperturbed logical energies.
    const Operator y = interaction_rk4(
        e, pm.d, pm.coef, y0, pm.duration, opts.dt > 0.0 ? opts.dt : default_dt(e, pm.omega_drive),
        std::numeric_limits<std::size_t>::max(),
        [](double, const Operator&) {}, &out.max_norm_error);
    out.map = y.topRows(2);
    return out;
}

StateVector haar_state(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    StateVector v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double re = g(rng);
        const double im = g(rng);
        v(i) = cplx(re, im);
    }
    return v / v.norm();
}

FidelityEstimate average_fidelity(const Operator& target, const Operator& realized, std::size_t trials,
                                  std::uint64_t seed) {
    if (target.rows() != realized.rows() || target.cols() != realized.cols() || target.rows() != target.cols())
        throw ConfigError("target and realized maps differ in shape");
    if (trials < 100) throw ConfigError("average fidelity needs at least 100 trials");
    const auto d = static_cast<std::size_t>(target.rows());
    const Operator vm = target.adjoint() * realized;
    FidelityEstimate est;
    est.trials = trials;
    for (std::size_t j = 0; j < trials; ++j) {
        const StateVector psi = haar_state(d, seed + j);
        est.avg_fidelity += std::norm(psi.dot(vm * psi));
        est.leakage += 1.0 - (realized * psi).squaredNorm();
    }
    est.avg_fidelity /= static_cast<double>(trials);
    est.leakage = std::clamp(est.leakage / static_cast<double>(trials), 0.0, 1.0);
    est.avg_fidelity = std::min(est.avg_fidelity, 1.0);
    return est;
}

double average_fidelity_exact(const Operator& target, const Operator& realized) {
    const auto d = static_cast<double>(target.rows());
    const double tr = std::norm((target.adjoint() * realized).trace());
    const double mm = (realized.adjoint() * realized).trace().real();
    return (tr + mm) / (d * (d + 1.0));
}

Operator gate_matrix(const std::string& name) {
    const double r = 1.0 / std::sqrt(2.0);
    if (name == "identity" || name == "i") return Operator::Identity(2, 2);
    if (name == "x") return pauli(Axis::x);
    if (name == "y") return pauli(Axis::y);
    if (name == "z") return pauli(Axis::z);
    if (name == "sqrt-iswap" || name == "sqrt_iswap") {
        Operator u = Operator::Identity(4, 4);
        u(1, 1) = u(2, 2) = r;
        u(1, 2) = u(2, 1) = cplx(0.0, r);
        return u;
    }
    throw ConfigError("unknown gate '" + name + "'");
}

namespace {

GateResult finish(std::string name, const Operator& target, const Operator& map, std::size_t trials,
                  std::uint64_t seed) {
    GateResult g;
    g.name = std::move(name);
    g.logical_unitary = map;
    const FidelityEstimate est = average_fidelity(target, map, trials, seed);
    g.avg_fidelity = est.avg_fidelity;
    g.leakage = est.leakage;
    g.trials = est.trials;
    g.seed = seed;
    g.exact_fidelity = average_fidelity_exact(target, map);
    return g;
}

}  // namespace

GateResult calibrate_xy_gate(const ChainSpec& spec, char gate, const SingleQubitGateConfig& cfg,
                             DrivePulse* pulse_out) {
    if (gate != 'x' && gate != 'y') throw ConfigError("xy calibration handles gates x and y");
    if (!(cfg.amplitude > 0.0)) throw ConfigError("drive amplitude must be positive");
    if (cfg.trials < 100) throw ConfigError("average fidelity needs at least 100 trials");
    spec.validate();
    const Spectrum s = chain_spectrum(spec);
    const Operator d = eigenbasis_operator(s, cfg.drive_axis, cfg.site);
    const cplx m = d(1, 0);
    if (std::abs(m) < 1e-8) throw NumericalError("calibration failed: drive does not couple the logical states");
    const double w10 = s.eigenvalues(1) - s.eigenvalues(0);

    DrivePulse base;
    base.target_site = cfg.site;
    base.drive_axis = cfg.drive_axis;
    base.amplitude = cfg.amplitude;
    base.envelope = cfg.envelope;
    base.carrier_freq = w10;
    // The resonant drive rotates about cos(theta) X + sin(theta) Y with
    // theta = arg(m) - phase.
    base.phase = std::arg(m) - (gate == 'x' ? 0.0 : 0.5 * kPi);
    base.duration = 1.0;
    const double area_per_time = base.envelope_area();
    base.duration = kPi / (cfg.amplitude * std::abs(m) * area_per_time);

    const Operator target = gate_matrix(std::string(1, gate));
    const double rabi = cfg.amplitude * std::abs(m);
    auto pulse_for = [&](const std::vector<double>& x) {
        DrivePulse p = base;
        p.amplitude = cfg.amplitude * x[0];
        p.carrier_freq = w10 + rabi * x[1];
        return p;
    };
    auto objective = [&](const std::vector<double>& x) {
        if (x[0] <= 0.0) return 1.0;
        return 1.0 - average_fidelity_exact(target, single_qubit_logical_map(spec, pulse_for(x), cfg.propagation).map);
    };
    const MinimizeResult best = nelder_mead(objective, {1.0, 0.0}, {0.01, 0.01}, 1e-5, 200);
    const DrivePulse p = pulse_for(best.x);
    const LogicalMap lm = single_qubit_logical_map(spec, p, cfg.propagation);
    GateResult g = finish(std::string(1, gate), target, lm.map, cfg.trials, cfg.seed);
    g.calibration = {{"amplitude", p.amplitude},
                     {"amplitude_scale", best.x[0]},
                     {"carrier_freq", p.carrier_freq},
                     {"detuning", p.carrier_freq - w10},
                     {"phase", p.phase},
                     {"duration", p.duration},
                     {"site", cfg.site},
                     {"drive_axis", static_cast<double>(cfg.drive_axis)},
                     {"omega10", w10},
                     {"max_norm_error", lm.max_norm_error},
                     {"optimizer_iterations", best.iterations}};
    if (pulse_out) *pulse_out = p;
    return g;
}

namespace {

double omega10_at(const ChainSpec& spec, int site, double omega) {
    ChainSpec c = spec;
    if (c.omega.empty()) c.omega.assign(static_cast<std::size_t>(c.n), 1.0);
    c.omega.at(static_cast<std::size_t>(site - 1)) = omega;
    return logical_qubit(c).omega10;
}

}  // namespace

std::vector<ZCurvePoint> z_gate_curve(const ChainSpec& spec, const std::vector<double>& omega_grid, int site,
                                       double h) {
    spec.validate();
    if (site < 1 || site > spec.n) throw ConfigError("bad site");
    std::vector<ZCurvePoint> out;
    out.reserve(omega_grid.size());
    for (double w : omega_grid) {
        if (!(w > 0.0) || w > 2.0) throw ConfigError("omega_q1 grid must lie in (0, 2]");
        const double hh = std::min(h, 0.5 * w);
        const double d = (omega10_at(spec, site, w + hh) - omega10_at(spec, site, w - hh)) / (2.0 * hh);
        out.push_back({w, omega10_at(spec, site, w), d});
    }
    return out;
}

GateResult calibrate_z_gate(const ChainSpec& spec, const ZGateConfig& cfg, FrequencyPulse* pulse_out) {
    spec.validate();
    if (cfg.site < 1 || cfg.site > spec.n) throw ConfigError("bad site");
    if (cfg.detuning == 0.0) throw ConfigError("z gate needs a non-zero detuning");
    if (cfg.trials < 100) throw ConfigError("average fidelity needs at least 100 trials");
    const double w0 = spec.omega_at(cfg.site);
    if (w0 + cfg.detuning <= 0.0) throw ConfigError("detuning drives the qubit frequency non-positive");
    const double w10 = logical_qubit(spec).omega10;
    const double shift = omega10_at(spec, cfg.site, w0 + cfg.detuning) - w10;
    if (std::abs(shift) < 1e-12) throw NumericalError("calibration failed: logical frequency is insensitive");

    // Phase picked up during both ramps, Simpson rule on the sin^2 profile.
    constexpr int kPanels = 32;
    double ramp = 0.0;
    for (int k = 0; k <= kPanels; ++k) {
        const double u = static_cast<double>(k) / kPanels;
        const double wgt = (k == 0 || k == kPanels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double f = std::pow(std::sin(0.5 * kPi * u), 2);
        ramp += wgt * (omega10_at(spec, cfg.site, w0 + cfg.detuning * f) - w10);
    }
    ramp *= cfg.ramp_time / (3.0 * kPanels);

    // relative phase = -(2 ramp + hold shift); aim for an odd multiple of pi
    double hold = -1.0;
    for (int k = 0; hold < 0.0; ++k) hold = (std::copysign((2 * k + 1) * kPi, shift) - 2.0 * ramp) / shift;

    FrequencyPulse p{cfg.site, cfg.detuning, hold, cfg.ramp_time};
    LogicalMap lm;
    for (int it = 0; it < 8; ++it) {
        lm = single_qubit_logical_map(spec, p, cfg.propagation);
        const double err = wrap_phase(std::arg(lm.map(1, 1) / lm.map(0, 0)) - kPi);
        if (std::abs(err) < 1e-9) break;
        p.hold_time = std::max(0.0, p.hold_time + err / shift);
    }
    GateResult g = finish("z", gate_matrix("z"), lm.map, cfg.trials, cfg.seed);
    g.calibration = {{"detuning", p.detuning},   {"hold_time", p.hold_time},
                     {"ramp_time", p.ramp_time}, {"duration", pulse_duration(p)},
                     {"site", cfg.site},         {"omega10_shift", shift},
                     {"omega10", w10},           {"max_norm_error", lm.max_norm_error}};
    if (pulse_out) *pulse_out = p;
    return g;
}

Operator z_frame(const std::vector<double>& angles, std::size_t dim, bool post) {
    const std::size_t off = post ? 0 : (dim == 2 ? 1 : 2);
    Eigen::VectorXcd z(static_cast<Eigen::Index>(dim));
    if (dim == 2) {
        z << 1.0, std::polar(1.0, angles[off]);
    } else if (dim == 4) {
        const double a = angles[off], b = angles[off + 1];
        z << 1.0, std::polar(1.0, b), std::polar(1.0, a), std::polar(1.0, a + b);
    } else {
        throw ConfigError("z frames are defined for one or two logical qubits");
    }
    return z.asDiagonal();
}

ZFrameResult optimize_z_frames(const Operator& target, const Operator& realized, const std::vector<double>& guess) {
    const auto dim = static_cast<std::size_t>(target.rows());
    if (dim != 2 && dim != 4) throw ConfigError("z frames are defined for one or two logical qubits");
    const std::size_t np = dim == 2 ? 2 : 4;
    auto objective = [&](const std::vector<double>& x) {
        return 1.0 - average_fidelity_exact(target, z_frame(x, dim, true) * realized * z_frame(x, dim, false));
    };
    std::vector<std::vector<double>> starts;
    if (guess.size() == np) {
        starts.push_back(guess);
    } else {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < (np == 4 ? 4 : 1); ++j) {
                std::vector<double> s(np, 0.0);
                s[0] = 0.5 * kPi * i;
                if (np == 4) s[1] = 0.5 * kPi * j;
                starts.push_back(s);
            }
    }
    MinimizeResult best;
    best.value = 2.0;
    for (const auto& s : starts) {
        const MinimizeResult r = nelder_mead(objective, s, std::vector<double>(np, 0.2), 1e-9, 2000);
        if (r.value < best.value) best = r;
    }
    for (double& a : best.x) a = wrap_phase(a);
    ZFrameResult out;
    out.angles = best.x;
    out.corrected = z_frame(best.x, dim, true) * realized * z_frame(best.x, dim, false);
    out.fidelity = average_fidelity_exact(target, out.corrected);
    return out;
}

namespace {

/// Time-independent two-chain problem diagonalised once; maps at any time
/// follow exactly from the eigenphases.
class CoupledChains {
public:
    CoupledChains(const ChainSpec& a, const ChainSpec& b, double g, int site_a, int site_b) {
        a.validate();
        b.validate();
        const Spectrum sa = chain_spectrum(a);
        const Spectrum sb = chain_spectrum(b);
        const Operator da = eigenbasis_operator(sa, Axis::x, site_a);
        const Operator db = eigenbasis_operator(sb, Axis::x, site_b);
        Operator h = -g * kron(da, db);  // throws beyond the dimension cap
        const auto nb = static_cast<Eigen::Index>(sb.dim());
        for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) += sa.eigenvalues(i / nb) + sb.eigenvalues(i % nb);
        Eigen::SelfAdjointEigenSolver<Operator> es(h);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
        lambda_ = es.eigenvalues();
        rows_ = Operator(4, h.rows());
        for (int k = 0; k < 4; ++k) {
            const Eigen::Index idx = (k / 2) * nb + (k % 2);
            rows_.row(k) = es.eigenvectors().row(idx);
            logical_e_(k) = sa.eigenvalues(k / 2) + sb.eigenvalues(k % 2);
        }
        g_eff_ = std::abs(g * da(1, 0) * db(1, 0));
    }

    Operator map(double t) const {
        const Eigen::ArrayXcd ph = (cplx(0.0, -t) * lambda_.array().cast<cplx>()).exp();
        const Eigen::Array4cd frame = (cplx(0.0, t) * logical_e_.array().cast<cplx>()).exp();
        return frame.matrix().asDiagonal() * (rows_ * ph.matrix().asDiagonal() * rows_.adjoint());
    }

    double g_eff() const { return g_eff_; }

private:
    Eigen::VectorXd lambda_;
    Operator rows_;
    Eigen::Vector4d logical_e_;
    double g_eff_ = 0.0;
};

}  // namespace

LogicalMap two_qubit_logical_map(const ChainSpec& a, const ChainSpec& b, double g_xx, int site_a, int site_b,
                                 double duration, const PropagationOptions&) {
    if (duration < 0.0) throw ConfigError("duration must be non-negative");
    const CoupledChains cc(a, b, g_xx, site_a, site_b);
    LogicalMap out;
    out.map = cc.map(duration);
    return out;
}

GateResult sqrt_iswap(const ChainSpec& a, const ChainSpec& b, const TwoQubitConfig& cfg) {
    if (cfg.g_xx < 0.0) throw ConfigError("g_xx must be non-negative");
    if (cfg.trials < 100) throw ConfigError("average fidelity needs at least 100 trials");
    if (cfg.samples_per_gate_time < 10) throw ConfigError("samples_per_gate_time must be at least 10");
    const CoupledChains cc(a, b, cfg.g_xx, cfg.site_a, cfg.site_b);
    const double geff = cc.g_eff();
    if (!(geff > 0.0)) throw NumericalError("calibration failed: chains are not coupled");
    const Operator target = gate_matrix("sqrt-iswap");
    const double t_gate = kPi / (4.0 * geff);
    const double t_max = cfg.window / geff;
    const double h = t_gate / static_cast<double>(cfg.samples_per_gate_time);

    ZFrameResult cur = optimize_z_frames(target, cc.map(0.0));
    double best_t = 0.0;
    ZFrameResult best = cur;
    const auto samples = static_cast<std::size_t>(std::floor(t_max / h));
    for (std::size_t k = 1; k <= samples; ++k) {
        const double t = static_cast<double>(k) * h;
        const Operator m = cc.map(t);
        cur = optimize_z_frames(target, m, cur.angles);
        if (k % 50 == 0) {
            const ZFrameResult fresh = optimize_z_frames(target, m);
            if (fresh.fidelity > cur.fidelity) cur = fresh;
        }
        if (cur.fidelity > best.fidelity) {
            best = cur;
            best_t = t;
        }
        // past the first lobe
        if (best.fidelity > 0.9 && cur.fidelity < best.fidelity - 0.02) break;
    }
    // Golden-section refinement of the duration around the best sample.
    double lo = std::max(0.0, best_t - h), hi = best_t + h;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto fid_at = [&](double t) { return optimize_z_frames(target, cc.map(t), best.angles); };
    for (int it = 0; it < 40; ++it) {
        const double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        if (fid_at(x1).fidelity > fid_at(x2).fidelity) hi = x2; else lo = x1;
    }
    const double t_opt = 0.5 * (lo + hi);
    const ZFrameResult z = fid_at(t_opt);
    if (z.fidelity > best.fidelity) {
        best = z;
        best_t = t_opt;
    }
    if (best.fidelity < cfg.threshold)
        throw NumericalError("calibration failed: best sqrt(iSWAP) fidelity " + std::to_string(best.fidelity) +
                             " below threshold");
    GateResult g = finish("sqrt-iswap", target, best.corrected, cfg.trials, cfg.seed);
    g.calibration = {{"duration", best_t},       {"g_xx", cfg.g_xx},           {"g_eff", geff},
                     {"site_a", cfg.site_a},     {"site_b", cfg.site_b},       {"post_phase_a", best.angles[0]},
                     {"post_phase_b", best.angles[1]}, {"pre_phase_a", best.angles[2]},
                     {"pre_phase_b", best.angles[3]}};
    return g;
}

}  // namespace usc
