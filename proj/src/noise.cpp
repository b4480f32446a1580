#include "usc/noise.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace usc {

int sites_of(const Spectrum& s) {
    const std::size_t dim = s.dim();
    if (dim < 2 || !std::has_single_bit(dim)) throw ConfigError("spectrum is not a chain spectrum");
    return std::countr_zero(dim);
}

namespace {

void check_index(const Spectrum& s, std::size_t m, std::size_t n) {
    if (m >= s.dim() || n >= s.dim()) throw ConfigError("index out of range");
}

void check_pair(std::size_t m, std::size_t n) {
    if (m == n) throw ConfigError("degenerate pair request");
}

}  // namespace

cplx matrix_element(const Spectrum& s, Axis axis, int site, std::size_t m, std::size_t n) {
    check_index(s, m, n);
    const StateVector sn = apply_site_pauli(axis, site, sites_of(s), s.state(n));
    return s.state(m).dot(sn);
}

double dephasing_susceptibility(const Spectrum& s, Axis axis, int site, std::size_t m, std::size_t n) {
    check_pair(m, n);
    const cplx d = matrix_element(s, axis, site, m, m) - matrix_element(s, axis, site, n, n);
    return 0.25 * std::norm(d);
}

double relaxation_susceptibility(const Spectrum& s, Axis axis, int site, std::size_t m, std::size_t n) {
    check_pair(m, n);
    return std::norm(matrix_element(s, axis, site, m, n));
}

SusceptibilityReport report(const Spectrum& s, std::size_t m, std::size_t n) {
    check_pair(m, n);
    check_index(s, m, n);
    const int sites = sites_of(s);
    SusceptibilityReport r;
    r.pair = {m, n};
    r.delta_e = s.eigenvalues(static_cast<Eigen::Index>(n)) - s.eigenvalues(static_cast<Eigen::Index>(m));
    const StateVector vm = s.state(m), vn = s.state(n);
    for (Axis a : kAxes) {
        const auto k = static_cast<std::size_t>(a);
        for (int i = 1; i <= sites; ++i) {
            const StateVector sm = apply_site_pauli(a, i, sites, vm);
            const StateVector sn = apply_site_pauli(a, i, sites, vn);
            const cplx diag = vm.dot(sm) - vn.dot(sn);
            ChannelSusceptibility c{0.25 * std::norm(diag), std::norm(vm.dot(sn))};
            r.per_channel[{a, i}] = c;
            r.global_phi[k] += c.phi;
            r.global_R[k] += c.relax;
        }
        r.total_phi += r.global_phi[k];
        r.total_R += r.global_R[k];
    }
    return r;
}

SusceptibilityReport report(const ChainSpec& spec, std::size_t m, std::size_t n) {
    return report(chain_spectrum(spec), m, n);
}

double susceptibility_shift(const SusceptibilityReport& a, const SusceptibilityReport& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
        d += std::abs(a.global_phi[k] - b.global_phi[k]) + std::abs(a.global_R[k] - b.global_R[k]);
    return d;
}

bool Gains::phi_unbounded() const { return std::isinf(g_phi); }
bool Gains::relax_unbounded() const { return std::isinf(g_R); }

Gains gains(const SusceptibilityReport& r) {
    if (r.pair != std::pair<std::size_t, std::size_t>{0, 1})
        throw ConfigError("gains are defined for the logical pair (0,1)");
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double sphi = r.phi(Axis::z);
    const double srel = r.relax(Axis::x) + r.relax(Axis::y);
    return {sphi > 0.0 ? 1.0 / sphi : inf, srel > 0.0 ? 2.0 / srel : inf};
}

}  // namespace usc
