#include <doctest.h>

#include <cmath>

#include "usc/dynamics.hpp"

using namespace usc;

namespace {

StateVector plus_state(std::size_t dim) {
    StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(dim));
    psi(0) = psi(1) = 1.0 / std::sqrt(2.0);
    return psi;
}

std::vector<double> rho11(const Trajectory& t) {
    std::vector<double> y;
    for (const auto& r : t.states) y.push_back(r.entries(1, 1).real());
    return y;
}

std::vector<double> abs_rho10(const Trajectory& t) {
    std::vector<double> y;
    for (const auto& r : t.states) y.push_back(std::abs(r.entries(1, 0)));
    return y;
}

NoiseModel only(NoiseModel m, bool relax, bool deph) {
    m.enable_relaxation = relax;
    m.enable_dephasing = deph;
    return m;
}

}  // namespace

TEST_CASE("spectral density") {
    CHECK(SpectralDensity(0.3)(5.0) == 0.3);
    const SpectralDensity t({0.0, 1.0, 2.0}, {0.0, 1.0, 4.0});
    CHECK(t(0.5) == doctest::Approx(0.5));
    CHECK(t(1.5) == doctest::Approx(2.5));
    CHECK(t(-1.0) == 0.0);
    CHECK(t(3.0) == 4.0);
    CHECK_THROWS_AS(SpectralDensity(-1.0), ConfigError);
    CHECK_THROWS_AS(SpectralDensity({1.0, 0.0}, {1.0, 1.0}), ConfigError);
}

TEST_CASE("single-qubit dissipators") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 1, 0.0));
    const auto relax = build_dissipators(s, only(NoiseModel::uniform(1, 1e-2, 1e-2), true, false));
    REQUIRE(relax.size() == 2);  // sigma_x and sigma_y channels
    for (const auto& d : relax) {
        const auto& j = std::get<TransitionJump>(d.jump);
        CHECK(j.m == 0);
        CHECK(j.n == 1);
        CHECK(d.rate == doctest::Approx(1e-2));
        CHECK_FALSE(d.quasi_degenerate);
    }
    const auto deph = build_dissipators(s, only(NoiseModel::uniform(1, 1e-2, 1e-2), false, true));
    // x and y diagonal elements vanish but the jumps are still emitted with zero effect
    bool found_z = false;
    for (const auto& d : deph) {
        const auto& j = std::get<DiagonalJump>(d.jump);
        CHECK(d.rate == doctest::Approx(0.5e-2));
        if (d.channel.axis == Axis::z) {
            found_z = true;
            CHECK(j.d(0).real() == doctest::Approx(1.0));
            CHECK(j.d(1).real() == doctest::Approx(-1.0));
        }
    }
    CHECK(found_z);
    const Operator m = to_matrix(TransitionJump{0, 1}, 2);
    CHECK(m(0, 1) == cplx(1.0));
    CHECK(m.cwiseAbs().sum() == 1.0);
}

TEST_CASE("doublet relaxation rate matches the susceptibility report") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 4, 1.3));
    const double gamma = 1e-2;
    const auto ds = build_dissipators(s, only(NoiseModel::uniform(4, gamma, 0.0), true, false));
    double sum = 0.0;
    for (const auto& d : ds) {
        const auto& j = std::get<TransitionJump>(d.jump);
        if (j.m == 0 && j.n == 1) sum += d.rate;
    }
    const SusceptibilityReport r = report(s);
    CHECK(sum == doctest::Approx(gamma * (r.relax(Axis::x) + r.relax(Axis::y))).epsilon(1e-12));
}

TEST_CASE("evolve without dissipators is unitary") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 3, 1.3));
    StateVector psi = StateVector::Ones(8) / std::sqrt(8.0);
    EvolveOptions o;
    o.t_max = 20.0;
    o.stride = 100;
    const Trajectory t = evolve(DensityMatrix::pure(psi), s, {}, o);
    for (const auto& r : t.states)
        CHECK((r.entries.diagonal().real() - Eigen::VectorXd::Constant(8, 1.0 / 8.0)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("single-qubit relaxation: Gamma = 2 gamma") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 1, 0.0));
    StateVector one = StateVector::Zero(2);
    one(1) = 1.0;
    EvolveOptions o;
    o.t_max = 100.0;
    o.stride = 200;
    const Trajectory t = evolve(DensityMatrix::pure(one), s, build_dissipators(s, NoiseModel::uniform(1, 1e-2, 0.0)), o);
    const RateFit f = fit_rate(t.times, rho11(t));
    CHECK(f.rate == doctest::Approx(0.02).epsilon(1e-3));
    CHECK(t.max_trace_error <= 1e-8);
    CHECK(t.min_eigenvalue >= -1e-8);
}

TEST_CASE("XY N=4, lambda=1.3: rate laws and gains") {
    const Spectrum sl = chain_spectrum(ChainSpec::uniform(Model::xy, 4, 1.3));
    const Spectrum s1 = chain_spectrum(ChainSpec::uniform(Model::xy, 1, 0.0));
    const NoiseModel nl = NoiseModel::uniform(4, 1e-2, 1e-2), n1 = NoiseModel::uniform(1, 1e-2, 1e-2);
    EvolveOptions o;
    o.t_max = 100.0;
    o.stride = 500;

    const Trajectory dl = evolve(DensityMatrix::pure(plus_state(16)), sl, build_dissipators(sl, only(nl, false, true)), o);
    const Trajectory d1 = evolve(DensityMatrix::pure(plus_state(2)), s1, build_dissipators(s1, only(n1, false, true)), o);
    const double gphi_l = fit_rate(dl.times, abs_rho10(dl)).rate, gphi_1 = fit_rate(d1.times, abs_rho10(d1)).rate;
    CHECK(gphi_l == doctest::Approx(predicted_dephasing_rate(sl, nl, 0, 1)).epsilon(0.05));
    CHECK(gphi_1 / gphi_l == doctest::Approx(18.05).epsilon(0.05));

    const Trajectory rl = evolve(DensityMatrix::pure(plus_state(16)), sl, build_dissipators(sl, only(nl, true, false)), o);
    const Trajectory r1 = evolve(DensityMatrix::pure(plus_state(2)), s1, build_dissipators(s1, only(n1, true, false)), o);
    const double g1_l = fit_rate(rl.times, rho11(rl)).rate, g1_1 = fit_rate(r1.times, rho11(r1)).rate;
    CHECK(g1_l == doctest::Approx(predicted_relaxation_rate(sl, nl, 0, 1)).epsilon(0.05));
    CHECK(g1_l == doctest::Approx(0.02 / 1.34).epsilon(0.05));
    CHECK(g1_1 / g1_l == doctest::Approx(1.34).epsilon(0.05));
    for (const Trajectory* t : {&dl, &d1, &rl, &r1}) {
        CHECK(t->max_trace_error <= 1e-8);
        CHECK(t->min_eigenvalue >= -1e-8);
    }
}

TEST_CASE("dephasing-rate law at XY N=3, lambda=2.5") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 3, 2.5));
    const NoiseModel n = only(NoiseModel::uniform(3, 0.0, 2e-2), false, true);
    EvolveOptions o;
    o.t_max = 50.0;
    o.stride = 500;
    const Trajectory t = evolve(DensityMatrix::pure(plus_state(8)), s, build_dissipators(s, n), o);
    CHECK(fit_rate(t.times, abs_rho10(t)).rate == doctest::Approx(predicted_dephasing_rate(s, n, 0, 1)).epsilon(0.05));
}

TEST_CASE("evolve is deterministic") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 3, 1.3));
    const auto ds = build_dissipators(s, NoiseModel::uniform(3, 1e-2, 1e-2));
    EvolveOptions o;
    o.t_max = 5.0;
    const Trajectory a = evolve(DensityMatrix::pure(plus_state(8)), s, ds, o);
    const Trajectory b = evolve(DensityMatrix::pure(plus_state(8)), s, ds, o);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k)
        CHECK((a.states[k].entries - b.states[k].entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("integrator failure is reported") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 1, 0.0));
    const auto ds = build_dissipators(s, NoiseModel::uniform(1, 1.0, 1.0));
    EvolveOptions o;
    o.t_max = 200.0;
    o.dt = 5.0;
    CHECK_THROWS_WITH_AS(evolve(DensityMatrix::pure(plus_state(2)), s, ds, o), doctest::Contains("integrator failure"),
                         NumericalError);
}

TEST_CASE("invalid initial state") {
    const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::xy, 1, 0.0));
    DensityMatrix bad{Operator::Identity(2, 2)};
    CHECK_THROWS_AS(evolve(bad, s, {}, EvolveOptions{}), ConfigError);
}

TEST_CASE("fit_rate") {
    std::vector<double> t, y;
    for (int k = 0; k < 50; ++k) {
        t.push_back(2.0 * k);
        y.push_back(std::exp(-0.01 * 2.0 * k));
    }
    const RateFit f = fit_rate(t, y);
    CHECK(std::abs(f.rate - 0.01) <= 1e-6);
    CHECK(f.residual <= 1e-10);
    y[3] = 0.0;
    CHECK_THROWS_WITH_AS(fit_rate(t, y), doctest::Contains("bad series"), ConfigError);
    CHECK_THROWS_AS(fit_rate({1.0, 2.0}, {1.0, 0.5}), ConfigError);
}

TEST_CASE("quasi-degenerate transitions are flagged") {
    // sigma_z on site 2 only: sigma_x^(1) connects states of equal energy
    const Spectrum s = eigh(site_pauli(Axis::z, 2, 2));
    const auto ds = build_dissipators(s, only(NoiseModel::uniform(2, 1e-2, 0.0), true, false));
    bool any = false;
    for (const auto& d : ds) any = any || d.quasi_degenerate;
    CHECK(any);
    const auto plain = build_dissipators(chain_spectrum(ChainSpec::uniform(Model::xy, 1, 0.0)),
                                         only(NoiseModel::uniform(1, 1e-2, 0.0), true, false));
    for (const auto& d : plain) CHECK_FALSE(d.quasi_degenerate);
}
