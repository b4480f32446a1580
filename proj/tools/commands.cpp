#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "usc/circuit.hpp"
#include "usc/dynamics.hpp"
#include "usc/gates.hpp"
#include "usc/noise.hpp"

namespace usc::cli {

using nlohmann::json;

std::vector<double> linear_grid(double lo, double hi, int steps) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("grid bounds must be finite");
    if (steps < 0) throw ConfigError("steps must be >= 1");
    if (steps == 0) {
        if (lo != hi) throw ConfigError("steps must be >= 1");
        return {lo};
    }
    if (hi < lo) throw ConfigError("grid maximum below minimum");
    std::vector<double> g(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / steps;
    g.back() = hi;
    return g;
}

namespace {

constexpr const char* kUnits = "energies and rates in units of omega_q, time in units of 1/omega_q";

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

enum class Format { csv, json };

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

void emit_table(std::ostream& os, Format f, const std::string& command, const json& config, const Table& t,
                const json& footer = nullptr) {
    if (f == Format::json) {
        json j{{"command", command}, {"units", kUnits}, {"config", config}, {"columns", t.columns}};
        json rows = json::array();
        for (const auto& r : t.rows) {
            json row = json::array();
            for (double v : r) row.push_back(finite_or_null(v));
            rows.push_back(row);
        }
        j["rows"] = rows;
        if (!footer.is_null()) j["footer"] = footer;
        os << j.dump() << '\n';
        return;
    }
    os << "# uscsim " << command << '\n';
    os << "# units: " << kUnits << '\n';
    for (const auto& [k, v] : config.items()) os << "# " << k << ": " << v.dump() << '\n';
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << num(r[c]);
        os << '\n';
    }
    if (!footer.is_null()) os << "# footer: " << footer.dump() << '\n';
}

struct ChainOptions {
    std::string model = "xy";
    int n = 3;
    double lambda = 1.3;
    double perturb = 0.0;

    void add(CLI::App* app, bool with_lambda = true) {
        app->add_option("--model", model, "ising or xy")->capture_default_str();
        app->add_option("--n", n, "number of physical qubits")->capture_default_str();
        if (with_lambda) app->add_option("--lambda", lambda, "coupling strength")->capture_default_str();
        app->add_option("--perturb", perturb, "uniform sigma_x perturbation strength epsilon")->capture_default_str();
    }

    ChainSpec spec(int n_sites, double lam, double eps) const {
        ChainSpec s = ChainSpec::uniform(parse_model(model), n_sites, lam);
        if (eps != 0.0) s.perturb = uniform_sigma_x_perturbation(n_sites, eps);
        s.validate();
        return s;
    }
    ChainSpec spec() const { return spec(n, lambda, perturb); }

    json config(bool with_lambda = true) const {
        json j{{"model", model}, {"n", n}, {"perturb", perturb}};
        if (with_lambda) j["lambda"] = lambda;
        return j;
    }
};

struct Context {
    std::ostream& out;
    unsigned threads;
    Format format;
};

// ---------------------------------------------------------------- spectrum

struct SpectrumCmd {
    ChainOptions chain;
    int levels = 16;

    void add(CLI::App* app) {
        chain.add(app);
        app->add_option("--levels", levels, "number of lowest levels to list")->capture_default_str();
    }

    void run(const Context& cx) const {
        const ChainSpec spec = chain.spec();
        const Spectrum s = chain_spectrum(spec);
        if (levels < 2) throw ConfigError("levels must be at least 2");
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(levels), s.dim());
        const Operator par = parity_operator(spec.n);
        Table t{{"index", "energy", "delta_from_ground", "parity"}, {}};
        for (std::size_t j = 0; j < k; ++j) {
            const StateVector v = s.state(j);
            const double p = v.dot(par * v).real();
            t.rows.push_back({static_cast<double>(j), s.eigenvalues(static_cast<Eigen::Index>(j)),
                              s.eigenvalues(static_cast<Eigen::Index>(j)) - s.eigenvalues(0), p});
        }
        const SusceptibilityReport r = report(s);
        const Gains g = gains(r);
        json footer{{"omega10", r.delta_e},
                    {"s_phi", {r.global_phi[0], r.global_phi[1], r.global_phi[2]}},
                    {"s_r", {r.global_R[0], r.global_R[1], r.global_R[2]}},
                    {"g_phi", finite_or_null(g.g_phi)},
                    {"g_r", finite_or_null(g.g_R)}};
        json cfg = chain.config();
        cfg["levels"] = levels;
        emit_table(cx.out, cx.format, "spectrum", cfg, t, footer);
    }
};

// ------------------------------------------------------------ sweep-lambda

struct SweepLambdaCmd {
    ChainOptions chain;
    double lo = 0.0, hi = 2.5;
    int steps = 25;

    void add(CLI::App* app) {
        chain.add(app, false);
        app->add_option("--lambda-min", lo)->capture_default_str();
        app->add_option("--lambda-max", hi)->capture_default_str();
        app->add_option("--lambda-steps", steps, "number of grid intervals")->capture_default_str();
    }

    void run(const Context& cx) const {
        const std::vector<double> grid = linear_grid(lo, hi, steps);
        const bool pert = chain.perturb != 0.0;
        // validate before the pool starts
        chain.spec(chain.n, grid.front(), chain.perturb);
        auto point = [&](std::size_t i) {
            const double lam = grid[i];
            const SusceptibilityReport r = report(chain.spec(chain.n, lam, 0.0));
            std::vector<double> row{lam,        r.delta_e,  r.phi(Axis::z), r.relax(Axis::x),
                                    r.relax(Axis::y), r.total_phi, r.total_R};
            if (pert) {
                const SusceptibilityReport q = report(chain.spec(chain.n, lam, chain.perturb));
                const std::vector<double> extra{q.delta_e,   q.phi(Axis::z), q.relax(Axis::x), q.relax(Axis::y),
                                                q.total_phi, q.total_R,      susceptibility_shift(q, r)};
                row.insert(row.end(), extra.begin(), extra.end());
            }
            return row;
        };
        Table t{{"lambda", "delta_e", "s_phi_z", "s_r_x", "s_r_y", "s_phi_total", "s_r_total"}, {}};
        if (pert)
            for (const char* c : {"delta_e_pert", "s_phi_z_pert", "s_r_x_pert", "s_r_y_pert", "s_phi_total_pert",
                                  "s_r_total_pert", "abs_delta_s"})
                t.columns.emplace_back(c);
        t.rows = parallel_map(grid.size(), cx.threads, point);
        json cfg = chain.config(false);
        cfg["lambda_min"] = lo;
        cfg["lambda_max"] = hi;
        cfg["lambda_steps"] = steps;
        emit_table(cx.out, cx.format, "sweep-lambda", cfg, t);
    }
};

// ----------------------------------------------------------------- sweep-n

struct SweepNCmd {
    ChainOptions chain;
    int n_min = 2, n_max = 9;

    void add(CLI::App* app) {
        chain.lambda = 2.5;
        app->add_option("--model", chain.model, "ising or xy")->capture_default_str();
        app->add_option("--lambda", chain.lambda)->capture_default_str();
        app->add_option("--perturb", chain.perturb)->capture_default_str();
        app->add_option("--n-min", n_min)->capture_default_str();
        app->add_option("--n-max", n_max)->capture_default_str();
    }

    void run(const Context& cx) const {
        if (n_min < 1 || n_max < n_min) throw ConfigError("need 1 <= n-min <= n-max");
        chain.spec(n_max, chain.lambda, chain.perturb);  // "N too large" before any work
        auto point = [&](std::size_t i) {
            const int n = n_min + static_cast<int>(i);
            const SusceptibilityReport r = report(chain.spec(n, chain.lambda, chain.perturb));
            return std::vector<double>{static_cast<double>(n), r.total_phi, r.relax(Axis::x), r.relax(Axis::y),
                                       r.delta_e};
        };
        Table t{{"n", "s_phi_total", "s_r_x", "s_r_y", "delta_e"}, {}};
        t.rows = parallel_map(static_cast<std::size_t>(n_max - n_min + 1), cx.threads, point);
        json cfg{{"model", chain.model}, {"lambda", chain.lambda}, {"perturb", chain.perturb},
                 {"n_min", n_min},       {"n_max", n_max}};
        emit_table(cx.out, cx.format, "sweep-n", cfg, t);
    }
};

// ------------------------------------------------------------------- decay

struct DecayCmd {
    ChainOptions chain;
    double gamma = 1e-2, gamma_phi = 1e-2, t_max = 200.0, dt = 0.0;
    int samples = 201;
    std::string process = "split";
    std::string series = "compare";

    void add(CLI::App* app) {
        chain.n = 4;
        chain.add(app);
        app->add_option("--gamma", gamma, "relaxation rate per channel")->capture_default_str();
        app->add_option("--gamma-phi", gamma_phi, "dephasing rate per channel")->capture_default_str();
        app->add_option("--t-max", t_max)->capture_default_str();
        app->add_option("--dt", dt, "largest integration step, shrunk so samples land on the grid (<= 0: automatic)")->capture_default_str();
        app->add_option("--samples", samples, "rows in the output")->capture_default_str();
        app->add_option("--process", process,
                        "split: rho10 under dephasing only and rho11 under relaxation only; "
                        "joint, relaxation, dephasing: one run with those channels")
            ->capture_default_str();
        app->add_option("--series", series,
                        "compare: single-qubit and logical side by side; logical: full logical time series")
            ->capture_default_str();
    }

    struct Run {
        std::vector<double> t, rho11, rho10, re10, im10, trace;
        double trace_error = 0.0, min_eig = 0.0;
    };

    static NoiseModel only(NoiseModel m, bool relax, bool deph) {
        m.enable_relaxation = relax;
        m.enable_dephasing = deph;
        return m;
    }

    NoiseModel restrict(const NoiseModel& m) const {
        if (process == "relaxation") return only(m, true, false);
        if (process == "dephasing") return only(m, false, true);
        return m;
    }

    void run(const Context& cx) const {
        if (!(gamma >= 0.0) || !(gamma_phi >= 0.0)) throw ConfigError("rates must be non-negative");
        if (!(t_max > 0.0)) throw ConfigError("t-max must be positive");
        if (samples < 10) throw ConfigError("samples must be at least 10");
        if (process != "split" && process != "joint" && process != "relaxation" && process != "dephasing")
            throw ConfigError("process must be split, joint, relaxation or dephasing");
        if (series != "compare" && series != "logical") throw ConfigError("series must be compare or logical");
        if (series == "logical" && process == "split")
            throw ConfigError("series logical needs process joint, relaxation or dephasing");
        const ChainSpec single = ChainSpec::uniform(Model::xy, 1, 0.0);
        const ChainSpec logical = chain.spec();
        const Spectrum s1 = chain_spectrum(single), sl = chain_spectrum(logical);
        const NoiseModel n1 = NoiseModel::uniform(1, gamma, gamma_phi);
        const NoiseModel nl = NoiseModel::uniform(logical.n, gamma, gamma_phi);
        const bool split = process == "split";
        struct Job {
            const Spectrum* s;
            NoiseModel noise;
        };
        // jobs 0/1 provide rho11 (single/logical), the last two |rho10|
        std::vector<Job> jobs;
        if (series == "logical")
            jobs = {{&sl, restrict(nl)}};
        else if (split)
            jobs = {{&s1, only(n1, true, false)}, {&sl, only(nl, true, false)},
                    {&s1, only(n1, false, true)}, {&sl, only(nl, false, true)}};
        else
            jobs = {{&s1, restrict(n1)}, {&sl, restrict(nl)}};

        std::vector<std::vector<Dissipator>> diss;
        double step = dt;
        std::size_t quasi = 0;
        for (const Job& j : jobs) {
            diss.push_back(build_dissipators(*j.s, j.noise));
            for (const Dissipator& d : diss.back()) quasi += d.quasi_degenerate;
            if (dt <= 0.0) {
                const double d = default_time_step(*j.s, diss.back());
                step = step <= 0.0 ? d : std::min(step, d);
            }
        }
        // shrink the step so that the samples fall exactly on the grid
        const auto intervals = static_cast<std::size_t>(samples - 1);
        const std::size_t stride =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_max / step / intervals - 1e-9)));
        if (t_max > 0.0) step = t_max / static_cast<double>(stride * intervals);

        auto simulate = [&](std::size_t i) {
            const Job& j = jobs[i];
            StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(j.s->dim()));
            psi(0) = psi(1) = 1.0 / std::sqrt(2.0);
            EvolveOptions o;
            o.t_max = t_max;
            o.dt = step;
            o.stride = stride;
            const Trajectory tr = evolve(DensityMatrix::pure(psi), *j.s, diss[i], o);
            Run r;
            r.t = tr.times;
            r.trace_error = tr.max_trace_error;
            r.min_eig = tr.min_eigenvalue;
            for (const auto& rho : tr.states) {
                r.rho11.push_back(rho.entries(1, 1).real());
                r.rho10.push_back(std::abs(rho.entries(1, 0)));
                r.re10.push_back(rho.entries(1, 0).real());
                r.im10.push_back(rho.entries(1, 0).imag());
                r.trace.push_back(rho.trace());
            }
            return r;
        };
        const std::vector<Run> runs = parallel_map(jobs.size(), cx.threads, simulate);
        double terr = 0.0, mine = 1.0;
        for (const Run& r : runs) {
            terr = std::max(terr, r.trace_error);
            mine = std::min(mine, r.min_eig);
        }

        auto fit = [](const std::vector<double>& tt, const std::vector<double>& y) -> json {
            std::vector<double> ft, fy;
            for (std::size_t k = 0; k < y.size(); ++k)
                if (y[k] > 1e-12 * y.front()) {
                    ft.push_back(tt[k]);
                    fy.push_back(y[k]);
                }
            const RateFit f = fit_rate(ft, fy);
            return {{"rate", f.rate}, {"amplitude", f.amplitude}, {"residual", f.residual}};
        };
        auto ratio = [](double a, double b) { return b > 0.0 ? json(a / b) : json(nullptr); };
        const Gains g = gains(report(sl));
        json predicted{{"dephasing_single", predicted_dephasing_rate(s1, n1, 0, 1)},
                       {"dephasing_logical", predicted_dephasing_rate(sl, nl, 0, 1)},
                       {"relaxation_single", predicted_relaxation_rate(s1, n1, 0, 1)},
                       {"relaxation_logical", predicted_relaxation_rate(sl, nl, 0, 1)}};

        json cfg = chain.config();
        cfg["gamma"] = gamma;
        cfg["gamma_phi"] = gamma_phi;
        cfg["t_max"] = t_max;
        cfg["dt"] = dt;
        cfg["samples"] = samples;
        cfg["process"] = process;
        cfg["series"] = series;
        cfg["initial_state"] = "(|0>+|1>)/sqrt2";

        Table t;
        json footer{{"gains_predicted", {{"g_phi", finite_or_null(g.g_phi)}, {"g_r", finite_or_null(g.g_R)}}},
                    {"predicted_rates", predicted},
                    {"dt", step},
                    {"quasi_degenerate_transitions", quasi},
                    {"max_trace_error", terr},
                    {"min_eigenvalue", mine}};
        if (series == "logical") {
            const Run& r = runs[0];
            t.columns = {"t", "rho11", "re_rho10", "im_rho10", "abs_rho10", "trace"};
            for (std::size_t k = 0; k < r.t.size(); ++k)
                t.rows.push_back({r.t[k], r.rho11[k], r.re10[k], r.im10[k], r.rho10[k], r.trace[k]});
            emit_table(cx.out, cx.format, "decay", cfg, t, footer);
            return;
        }
        const Run& r11s = runs[0];
        const Run& r11l = runs[1];
        const Run& r10s = runs[split ? 2 : 0];
        const Run& r10l = runs[split ? 3 : 1];
        t.columns = {"t", "rho11_single", "rho11_logical", "abs_rho10_single", "abs_rho10_logical"};
        for (std::size_t k = 0; k < r11s.t.size(); ++k)
            t.rows.push_back({r11s.t[k], r11s.rho11[k], r11l.rho11[k], r10s.rho10[k], r10l.rho10[k]});
        json fits;
        json gains_fit;
        if (process != "dephasing") {
            fits["rho11_single"] = fit(r11s.t, r11s.rho11);
            fits["rho11_logical"] = fit(r11l.t, r11l.rho11);
            gains_fit["g_r"] = ratio(fits["rho11_single"]["rate"].get<double>(),
                                     fits["rho11_logical"]["rate"].get<double>());
        }
        fits["rho10_single"] = fit(r10s.t, r10s.rho10);
        fits["rho10_logical"] = fit(r10l.t, r10l.rho10);
        gains_fit["g_phi"] = ratio(fits["rho10_single"]["rate"].get<double>(),
                                   fits["rho10_logical"]["rate"].get<double>());
        footer["fit"] = fits;
        footer["gains_fit"] = gains_fit;
        emit_table(cx.out, cx.format, "decay", cfg, t, footer);
    }
};

// -------------------------------------------------------------------- gate

struct GateCmd {
    ChainOptions chain;
    std::string gates = "x,y,z,sqrt-iswap";
    std::size_t trials = 200;
    std::uint64_t seed = 1234;
    double amplitude = 0.02, detuning = -0.1, ramp = 20.0, g_xx = 0.01, threshold = 0.999, dt = 0.0;
    int drive_site = 1, site_a = 1, site_b = 1;
    std::string drive_axis = "x", envelope = "gaussian";
    bool z_curve = false;
    double omega_min = 0.5, omega_max = 1.5;
    int omega_steps = 20;
    int z_site = 1;

    void add(CLI::App* app) {
        chain.add(app);
        app->add_option("--gates", gates, "comma list of x, y, z, sqrt-iswap, identity")->capture_default_str();
        app->add_option("--trials", trials, "Haar-random states per fidelity")->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--amplitude", amplitude, "drive amplitude A")->capture_default_str();
        app->add_option("--drive-site", drive_site)->capture_default_str();
        app->add_option("--drive-axis", drive_axis, "x or y")->capture_default_str();
        app->add_option("--envelope", envelope, "gaussian or flat")->capture_default_str();
        app->add_option("--detuning", detuning, "Z gate frequency excursion of the driven qubit")
            ->capture_default_str();
        app->add_option("--ramp", ramp, "Z gate ramp time")->capture_default_str();
        app->add_option("--z-site", z_site, "site whose frequency is moved for Z")->capture_default_str();
        app->add_option("--g-xx", g_xx, "inter-chain coupling for sqrt-iswap")->capture_default_str();
        app->add_option("--site-a", site_a)->capture_default_str();
        app->add_option("--site-b", site_b)->capture_default_str();
        app->add_option("--threshold", threshold, "sqrt-iswap calibration threshold")->capture_default_str();
        app->add_option("--dt", dt, "propagation step (<= 0: automatic)")->capture_default_str();
        app->add_flag("--z-curve", z_curve, "export omega10 against omega_q1 instead of running gates");
        app->add_option("--omega-min", omega_min)->capture_default_str();
        app->add_option("--omega-max", omega_max)->capture_default_str();
        app->add_option("--omega-steps", omega_steps)->capture_default_str();
    }

    json config() const {
        json j = chain.config();
        if (z_curve) {
            j["omega_min"] = omega_min;
            j["omega_max"] = omega_max;
            j["omega_steps"] = omega_steps;
            j["z_site"] = z_site;
            return j;
        }
        j.update(json{{"gates", gates},         {"trials", trials},       {"seed", seed},
                      {"amplitude", amplitude}, {"drive_site", drive_site}, {"drive_axis", drive_axis},
                      {"envelope", envelope},   {"detuning", detuning},   {"ramp", ramp},
                      {"z_site", z_site},       {"g_xx", g_xx},           {"site_a", site_a},
                      {"site_b", site_b},       {"threshold", threshold}, {"dt", dt}});
        return j;
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty()) out.push_back(item);
        return out;
    }

    GateResult one(const std::string& name, const ChainSpec& spec) const {
        PropagationOptions prop;
        prop.dt = dt;
        if (name == "x" || name == "y") {
            SingleQubitGateConfig c;
            c.site = drive_site;
            c.drive_axis = parse_axis(drive_axis);
            c.amplitude = amplitude;
            c.envelope = envelope == "flat" ? Envelope::flat : Envelope::gaussian;
            c.trials = trials;
            c.seed = seed;
            c.propagation = prop;
            return calibrate_xy_gate(spec, name[0], c);
        }
        if (name == "z") {
            ZGateConfig c;
            c.site = z_site;
            c.detuning = detuning;
            c.ramp_time = ramp;
            c.trials = trials;
            c.seed = seed;
            c.propagation = prop;
            return calibrate_z_gate(spec, c);
        }
        if (name == "sqrt-iswap") {
            TwoQubitConfig c;
            c.g_xx = g_xx;
            c.site_a = site_a;
            c.site_b = site_b;
            c.threshold = threshold;
            c.trials = trials;
            c.seed = seed;
            c.propagation = prop;
            return sqrt_iswap(spec, spec, c);
        }
        if (name == "identity") {
            DrivePulse idle;
            idle.amplitude = 0.0;
            idle.duration = 100.0;
            idle.envelope = Envelope::flat;
            idle.target_site = drive_site;
            const LogicalMap m = single_qubit_logical_map(spec, idle, prop);
            const Operator id = gate_matrix("identity");
            GateResult g;
            g.name = "identity";
            g.logical_unitary = m.map;
            const FidelityEstimate e = average_fidelity(id, m.map, trials, seed);
            g.avg_fidelity = e.avg_fidelity;
            g.leakage = e.leakage;
            g.trials = e.trials;
            g.seed = seed;
            g.exact_fidelity = average_fidelity_exact(id, m.map);
            g.calibration = {{"duration", idle.duration}};
            return g;
        }
        throw ConfigError("unknown gate '" + name + "'");
    }

    struct Outcome {
        std::optional<GateResult> result;
        std::string error;
        int code = 0;
    };

    int run(const Context& cx) const {
        const ChainSpec spec = chain.spec();
        if (drive_axis != "x" && drive_axis != "y") throw ConfigError("drive-axis must be x or y");
        if (envelope != "gaussian" && envelope != "flat") throw ConfigError("envelope must be gaussian or flat");
        if (z_curve) {
            const std::vector<double> grid = linear_grid(omega_min, omega_max, omega_steps);
            Table t{{"omega_q1", "omega10", "domega10"}, {}};
            for (const ZCurvePoint& p : z_gate_curve(spec, grid, z_site))
                t.rows.push_back({p.omega_q1, p.omega10, p.domega10});
            emit_table(cx.out, cx.format, "gate", config(), t);
            return 0;
        }
        if (trials < 100) throw ConfigError("trials must be at least 100");
        const std::vector<std::string> names = split(gates);
        if (names.empty()) throw ConfigError("no gates requested");
        for (const auto& n : names)
            if (n != "x" && n != "y" && n != "z" && n != "sqrt-iswap" && n != "identity")
                throw ConfigError("unknown gate '" + n + "'");
        auto work = [&](std::size_t i) {
            Outcome o;
            try {
                o.result = one(names[i], spec);
            } catch (const ConfigError& e) {
                o.error = e.what();
                o.code = 2;
            } catch (const std::exception& e) {
                o.error = e.what();
                o.code = 3;
            }
            return o;
        };
        const std::vector<Outcome> res = parallel_map(names.size(), cx.threads, work);
        int code = 0;
        if (cx.format == Format::csv) {
            cx.out << "# uscsim gate\n# units: " << kUnits << '\n';
            const json cfg = config();
            for (const auto& [k, v] : cfg.items()) cx.out << "# " << k << ": " << v.dump() << '\n';
            cx.out << "gate,fidelity,exact_fidelity,leakage,trials,seed,calibration,error\n";
        }
        for (std::size_t i = 0; i < res.size(); ++i) {
            const Outcome& o = res[i];
            code = std::max(code, o.code);
            if (cx.format == Format::json) {
                json j{{"gate", names[i]}, {"seed", seed}};
                if (o.result) {
                    j["fidelity"] = o.result->avg_fidelity;
                    j["exact_fidelity"] = o.result->exact_fidelity;
                    j["leakage"] = o.result->leakage;
                    j["trials"] = o.result->trials;
                    j["calibration"] = o.result->calibration;
                } else {
                    j["error"] = o.error;
                }
                j["config"] = chain.config();
                cx.out << j.dump() << '\n';
            } else {
                cx.out << names[i] << ',';
                if (o.result) {
                    std::string cal;
                    for (const auto& [k, v] : o.result->calibration) cal += (cal.empty() ? "" : ";") + k + "=" + num(v);
                    cx.out << num(o.result->avg_fidelity) << ',' << num(o.result->exact_fidelity) << ','
                           << num(o.result->leakage) << ',' << o.result->trials << ',' << seed << ',' << cal << ",\n";
                } else {
                    cx.out << ",,,," << seed << ",,\"" << o.error << "\"\n";
                }
            }
        }
        return code;
    }
};

// ----------------------------------------------------------------- circuit

struct CircuitCmd {
    CircuitParams p;

    void add(CLI::App* app) {
        app->add_option("--alpha", p.alpha, "junction ratio")->capture_default_str();
        app->add_option("--beta", p.beta, "shunt ratio")->capture_default_str();
        app->add_option("--gamma-cap", p.gamma_cap, "C_g / C")->capture_default_str();
        app->add_option("--ej-ec", p.ej_ec, "E_J / E_C")->capture_default_str();
        app->add_option("--ejg-ej", p.ejg_ej, "E_J,g / E_J")->capture_default_str();
        app->add_option("--phi-ext", p.phi_ext, "external flux phase (rad)")->capture_default_str();
        app->add_option("--charge-cutoff", p.charge_cutoff, "n_max per node")->capture_default_str();
        app->add_option("--charge-energy-factor", p.charge_energy_factor,
                        "k in H = k E_C n^T (C Cbar^-1) n; 4 for E_C = e^2/2C")
            ->capture_default_str();
        app->add_option("--levels", p.levels, "levels kept per qubit")->capture_default_str();
    }

    static json matrix3(const Eigen::Matrix3d& m) {
        json a = json::array();
        for (int i = 0; i < 3; ++i) a.push_back({m(i, 0), m(i, 1), m(i, 2)});
        return a;
    }

    void run(const Context& cx) const {
        p.validate();
        const SpinModel s = truncate_to_spins(p);
        const Eigen::MatrixXd inv = inverse_blocks(capacitance_matrix(p)).inverse;
        const double n12 = std::sqrt(s.omega_q[0] * s.omega_q[1]);
        const double n23 = std::sqrt(s.omega_q[1] * s.omega_q[2]);
        json j;
        j["config"] = {{"alpha", p.alpha},           {"beta", p.beta},
                       {"gamma_cap", p.gamma_cap},   {"ej_ec", p.ej_ec},
                       {"ejg_ej", p.ejg_ej},         {"phi_ext", p.phi_ext},
                       {"charge_cutoff", p.charge_cutoff}, {"charge_energy_factor", p.charge_energy_factor},
                       {"levels", p.levels}};
        j["units"] = "energies in E_C = e^2/2C; *_over_omega divide by sqrt(omega_qi omega_qj) of the coupled pair";
        j["omega_q"] = s.omega_q;
        j["g_JJ"] = matrix3(s.g_jj.g());
        j["g_C"] = matrix3(s.g_c.g());
        j["g_JJ_over_omega"] = matrix3(s.g_jj.g() / n12);
        j["g_C_over_omega"] = matrix3(s.g_c.g() / n23);
        j["identity_offsets"] = {
            {"g_JJ", {{"I_I", s.g_jj.full(0, 0)},
                      {"I_k", {s.g_jj.full(0, 1), s.g_jj.full(0, 2), s.g_jj.full(0, 3)}},
                      {"k_I", {s.g_jj.full(1, 0), s.g_jj.full(2, 0), s.g_jj.full(3, 0)}}}},
            {"g_C", {{"I_I", s.g_c.full(0, 0)},
                     {"I_k", {s.g_c.full(0, 1), s.g_c.full(0, 2), s.g_c.full(0, 3)}},
                     {"k_I", {s.g_c.full(1, 0), s.g_c.full(2, 0), s.g_c.full(3, 0)}}}}};
        j["frame_angles"] = s.frame_angle;
        j["zz_second_order"] = {{"jj_12", s.zz_jj}, {"c_23", s.zz_c}};
        j["convergence_report"] = {{"charge_cutoff", s.charge_cutoff},
                                   {"compared_with", s.charge_cutoff + 2},
                                   {"max_relative_level_shift", s.convergence},
                                   {"max_dropped_imaginary", s.max_imag}};
        json cinv = json::array();
        for (int r = 0; r < 6; ++r) {
            json row = json::array();
            for (int c = 0; c < 6; ++c) row.push_back(inv(r, c));
            cinv.push_back(row);
        }
        j["capacitance_inverse"] = cinv;
        if (cx.format == Format::json) {
            cx.out << j.dump(2) << '\n';
            return;
        }
        cx.out << "# uscsim circuit\n# units: " << j["units"].get<std::string>() << '\n';
        for (const auto& [k, v] : j["config"].items()) cx.out << "# " << k << ": " << v.dump() << '\n';
        cx.out << "quantity,value\n";
        for (int q = 0; q < 3; ++q) cx.out << "omega_q" << q + 1 << ',' << num(s.omega_q[q]) << '\n';
        const char ax[3] = {'x', 'y', 'z'};
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) cx.out << "g_JJ_" << ax[k] << ax[l] << ',' << num(s.g_jj.g()(k, l)) << '\n';
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) cx.out << "g_C_" << ax[k] << ax[l] << ',' << num(s.g_c.g()(k, l)) << '\n';
        cx.out << "zz_jj_12," << num(s.zz_jj) << "\nzz_c_23," << num(s.zz_c) << '\n';
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation of robust logical qubits encoded in ultrastrongly coupled spin chains"};
    app.require_subcommand(1);
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out_path, format = "csv";
    app.add_option("--threads", threads, "worker threads (default: available parallelism)");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--format", format, "csv or json")->capture_default_str();

    SpectrumCmd spectrum;
    SweepLambdaCmd sweep_lambda;
    SweepNCmd sweep_n;
    DecayCmd decay;
    GateCmd gate;
    CircuitCmd circuit;
    auto* c_spec = app.add_subcommand("spectrum", "lowest levels and logical-pair susceptibilities");
    auto* c_swl = app.add_subcommand("sweep-lambda", "susceptibilities against lambda");
    auto* c_swn = app.add_subcommand("sweep-n", "susceptibilities against N");
    auto* c_dec = app.add_subcommand("decay", "Lindblad decay of the logical qubit and a single-qubit reference");
    auto* c_gate = app.add_subcommand("gate", "calibrated logical gates and the Z-gate sensitivity curve");
    auto* c_circ = app.add_subcommand("circuit", "flux-qubit circuit reduced to an effective spin model");
    // --out/--format are accepted after the subcommand name too
    for (CLI::App* sub : {c_spec, c_swl, c_swn, c_dec, c_gate, c_circ}) sub->fallthrough();
    spectrum.add(c_spec);
    sweep_lambda.add(c_swl);
    sweep_n.add(c_swn);
    decay.add(c_dec);
    gate.add(c_gate);
    circuit.add(c_circ);

    std::vector<const char*> argv{"uscsim"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        const Format fmt = parse_format(format);
        if (threads == 0) throw ConfigError("threads must be positive");
        std::ostringstream buf;
        const Context cx{buf, threads, fmt};
        int code = 0;
        if (*c_spec) spectrum.run(cx);
        else if (*c_swl) sweep_lambda.run(cx);
        else if (*c_swn) sweep_n.run(cx);
        else if (*c_dec) decay.run(cx);
        else if (*c_gate) code = gate.run(cx);
        else if (*c_circ) circuit.run(cx);
        if (out_path.empty()) {
            out << buf.str();
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw ConfigError("cannot write '" + out_path + "'");
            f << buf.str();
            if (!f) throw ConfigError("cannot write '" + out_path + "'");
        }
        if (code == 2) err << "error: gate configuration rejected\n";
        if (code == 3) err << "error: gate calibration failed\n";
        return code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace usc::cli
