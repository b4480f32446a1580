#include <doctest.h>

#include <cmath>
#include <random>

#include "usc/models.hpp"
#include "usc/opcore.hpp"

using namespace usc;

namespace {

Operator random_hermitian(int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Operator a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
    return a + a.adjoint();
}

}  // namespace

TEST_CASE("kron basics") {
    CHECK(kron(identity(2), identity(2)).isApprox(identity(4)));
    const Operator xx = kron(pauli(Axis::x), pauli(Axis::x));
    CHECK(xx(0, 3) == cplx(1.0, 0.0));
    const Spectrum s = eigh(kron(pauli(Axis::z), identity(2)));
    CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(s.eigenvalues(1) == doctest::Approx(-1.0));
    CHECK(s.eigenvalues(2) == doctest::Approx(1.0));
    CHECK(s.eigenvalues(3) == doctest::Approx(1.0));
}

TEST_CASE("kron enforces the dimension limit") {
    const Operator big = identity(std::size_t{1} << 7);
    CHECK_THROWS_WITH_AS(kron(big, big), doctest::Contains("dimension limit"), ConfigError);
    CHECK_NOTHROW(kron(big, identity(32)));
}

TEST_CASE("kron is associative") {
    const Operator a = random_hermitian(2, 1), b = random_hermitian(3, 2), c = random_hermitian(2, 3);
    CHECK(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) <= 1e-14);
}

TEST_CASE("site_pauli") {
    CHECK(site_pauli(Axis::z, 1, 1).isApprox(pauli(Axis::z)));
    const Operator x2 = site_pauli(Axis::x, 2, 2);
    CHECK(max_abs(x2 * x2 - identity(4)) == 0.0);
    const Operator x1 = site_pauli(Axis::x, 1, 2), y2 = site_pauli(Axis::y, 2, 2);
    CHECK(max_abs(x1 * y2 - y2 * x1) == 0.0);
    CHECK_THROWS_WITH_AS(site_pauli(Axis::x, 0, 2), doctest::Contains("bad site"), ConfigError);
    CHECK_THROWS_WITH_AS(site_pauli(Axis::x, 3, 2), doctest::Contains("bad site"), ConfigError);
    // site 1 is the most significant factor
    CHECK(site_pauli(Axis::z, 1, 2).isApprox(kron(pauli(Axis::z), identity(2))));
}

TEST_CASE("Pauli algebra on every site") {
    const int n = 3;
    const cplx i(0.0, 1.0);
    for (int s = 1; s <= n; ++s) {
        const Operator x = site_pauli(Axis::x, s, n), y = site_pauli(Axis::y, s, n), z = site_pauli(Axis::z, s, n);
        CHECK(max_abs(x * y - i * z) <= 1e-15);
        CHECK(max_abs(y * z - i * x) <= 1e-15);
        CHECK(max_abs(z * x - i * y) <= 1e-15);
        CHECK(is_hermitian(x));
        CHECK(is_hermitian(y));
    }
}

TEST_CASE("apply_site_pauli matches the dense operator") {
    const int n = 4;
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    StateVector v(16);
    for (int k = 0; k < 16; ++k) v(k) = cplx(g(rng), g(rng));
    for (Axis a : kAxes)
        for (int s = 1; s <= n; ++s)
            CHECK((apply_site_pauli(a, s, n, v) - site_pauli(a, s, n) * v).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("eigh of sigma_z") {
    const Spectrum s = eigh(pauli(Axis::z));
    CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
    CHECK(std::abs(s.eigenvectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(s.eigenvectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("eigh of the two-qubit Ising chain (closed form)") {
    const double lam = 0.8;
    const Spectrum s = eigh(h_ising(ChainSpec::uniform(Model::ising, 2, lam)));
    CHECK(s.eigenvalues(0) == doctest::Approx(-std::sqrt(1.0 + lam * lam)).epsilon(1e-12));
    CHECK(s.eigenvalues(1) == doctest::Approx(-lam).epsilon(1e-12));
}

TEST_CASE("eigh contract: ordering, orthonormality, reconstruction, gauge") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const Operator h = random_hermitian(12, seed);
        const Spectrum s = eigh(h);
        for (Eigen::Index j = 0; j + 1 < s.eigenvalues.size(); ++j) CHECK(s.eigenvalues(j) <= s.eigenvalues(j + 1));
        const Operator& v = s.eigenvectors;
        CHECK(max_abs(v.adjoint() * v - identity(12)) <= 1e-10);
        const Operator rec = v * s.eigenvalues.cast<cplx>().asDiagonal() * v.adjoint();
        CHECK(max_abs(rec - h) <= 1e-9 * max_abs(h));
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            Eigen::Index k;
            v.col(c).cwiseAbs().maxCoeff(&k);
            CHECK(std::abs(v(k, c).imag()) <= 1e-15);
            CHECK(v(k, c).real() >= 0.0);
        }
        // idempotence
        const Spectrum s2 = eigh(rec);
        CHECK((s2.eigenvalues - s.eigenvalues).cwiseAbs().maxCoeff() <= 1e-10);
        // determinism
        const Spectrum again = eigh(h);
        CHECK((again.eigenvectors - s.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("eigh rejects non-Hermitian input") {
    Operator h = pauli(Axis::x);
    h(0, 1) = 2.0;
    CHECK_THROWS_WITH_AS(eigh(h), doctest::Contains("not hermitian"), NumericalError);
}

TEST_CASE("XY N=3 at lambda=50: four lowest levels pair up") {
    const Spectrum s = eigh(h_xy(ChainSpec::uniform(Model::xy, 3, 50.0)));
    // splittings O(omega^2 / lambda) against a gap O(lambda)
    CHECK(s.eigenvalues(1) - s.eigenvalues(0) < 1e-2);
    CHECK(s.eigenvalues(3) - s.eigenvalues(2) < 1e-2);
    CHECK(s.eigenvalues(4) - s.eigenvalues(3) > 50.0);
}

TEST_CASE("clusters") {
    Eigen::VectorXd v(5);
    v << 0.0, 1e-10, 1.0, 2.0, 2.0 + 1e-12;
    const auto c = clusters(v, 1e-8);
    REQUIRE(c.size() == 3);
    CHECK(c[0].size() == 2);
    CHECK(c[1].size() == 1);
    CHECK(c[2].first == 3);
    CHECK(c[2].last == 5);
}

TEST_CASE("resolve_degeneracy") {
    SUBCASE("non-degenerate spectrum unchanged") {
        const Operator h = h_ising(ChainSpec::uniform(Model::ising, 3, 0.7));
        const Spectrum s = eigh(h);
        const Spectrum r = resolve_degeneracy(s, parity_operator(3));
        CHECK((r.eigenvectors - s.eigenvectors).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("Ising N=3, lambda=5: doublet has definite parity +1 then -1") {
        const Spectrum s = chain_spectrum(ChainSpec::uniform(Model::ising, 3, 5.0));
        const Operator p = parity_operator(3);
        CHECK(s.state(0).dot(p * s.state(0)).real() == doctest::Approx(1.0));
        CHECK(s.state(1).dot(p * s.state(1)).real() == doctest::Approx(-1.0));
    }
    SUBCASE("exactly degenerate subspace spanned arbitrarily") {
        // H = sigma_x (x) sigma_x has two twofold-degenerate levels; rotate
        // the spanning vectors inside each before resolving.
        const Operator h = kron(pauli(Axis::x), pauli(Axis::x));
        Spectrum s = eigh(h);
        const double c = std::cos(0.3), sn = std::sin(0.3);
        for (Eigen::Index base : {0, 2}) {
            const StateVector a = s.eigenvectors.col(base), b = s.eigenvectors.col(base + 1);
            s.eigenvectors.col(base) = c * a + cplx(0.0, sn) * b;
            s.eigenvectors.col(base + 1) = cplx(0.0, sn) * a + c * b;
        }
        const Operator p = parity_operator(2);
        const Spectrum r = resolve_degeneracy(s, p);
        for (std::size_t j = 0; j < 4; ++j) {
            const StateVector v = r.state(j);
            const double sign = v.dot(p * v).real();
            CHECK(std::abs(std::abs(sign) - 1.0) <= 1e-10);
            CHECK((p * v - sign * v).norm() <= 1e-10);
        }
        CHECK(r.state(0).dot(p * r.state(0)).real() > 0.0);
    }
    SUBCASE("parity that does not commute is rejected") {
        const Spectrum s = eigh(kron(pauli(Axis::z), pauli(Axis::z)));
        CHECK_THROWS_WITH_AS(resolve_degeneracy(s, site_pauli(Axis::x, 1, 2)), doctest::Contains("parity mismatch"),
                             NumericalError);
    }
}
