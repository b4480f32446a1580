// noise.hpp - decoherence susceptibilities of eigenstate pairs
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <utility>

#include "usc/models.hpp"

namespace usc {

/// Coupling of site `site` to its bath through Pauli axis `axis`.
struct Channel {
    Axis axis = Axis::z;
    int site = 1;

    friend auto operator<=>(const Channel&, const Channel&) = default;
};

int sites_of(const Spectrum& s);

/// <m| sigma_axis^(site) |n> in the spectrum's eigenbasis.
cplx matrix_element(const Spectrum& s, Axis axis, int site, std::size_t m, std::size_t n);

/// (1/4) |S(m,m) - S(n,n)|^2
double dephasing_susceptibility(const Spectrum& s, Axis axis, int site, std::size_t m, std::size_t n);
/// |S(m,n)|^2
double relaxation_susceptibility(const Spectrum& s, Axis axis, int site, std::size_t m, std::size_t n);

struct ChannelSusceptibility {
    double phi = 0.0;
    double relax = 0.0;
};

struct SusceptibilityReport {
    std::pair<std::size_t, std::size_t> pair{0, 1};
    std::map<Channel, ChannelSusceptibility> per_channel;
    std::array<double, 3> global_phi{};
    std::array<double, 3> global_R{};
    double total_phi = 0.0;
    double total_R = 0.0;
    double delta_e = 0.0;

    double phi(Axis a) const { return global_phi[static_cast<std::size_t>(a)]; }
    double relax(Axis a) const { return global_R[static_cast<std::size_t>(a)]; }
};

SusceptibilityReport report(const Spectrum& s, std::size_t m = 0, std::size_t n = 1);
SusceptibilityReport report(const ChainSpec& spec, std::size_t m = 0, std::size_t n = 1);

/// Sum over axes of |delta global_phi| + |delta global_R| between two reports.
double susceptibility_shift(const SusceptibilityReport& a, const SusceptibilityReport& b);

/// Infinite gain (zero logical susceptibility) is reported as +inf.
struct Gains {
    double g_phi = 0.0;
    double g_R = 0.0;
    bool phi_unbounded() const;
    bool relax_unbounded() const;
};

/// G_phi = 1/S_z^phi, G_R = 2/(S_x^R + S_y^R) relative to one bare qubit.
Gains gains(const SusceptibilityReport& r);

}  // namespace usc
