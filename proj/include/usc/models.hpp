// models.hpp - open-chain Hamiltonians and the logical qubit they host
#pragma once

#include <string>
#include <vector>

#include "usc/opcore.hpp"

namespace usc {

enum class Model { ising, xy };

std::string model_name(Model m);
Model parse_model(const std::string& s);

/// A single-site term strength * sigma_axis^(site) added to the Hamiltonian.
struct Perturbation {
    int site = 1;
    Axis axis = Axis::x;
    double strength = 0.0;
};

/// Full problem definition of one chain. Energies in units of omega_q.
struct ChainSpec {
    Model model = Model::xy;
    int n = 3;
    std::vector<double> omega;  // per-site frequency; empty means all 1.0
    double lambda = 0.0;
    std::vector<Perturbation> perturb;

    static ChainSpec uniform(Model model, int n, double lambda);

    double omega_at(int site) const;
    /// Throws ConfigError on an inconsistent spec.
    void validate() const;
};

/// The same sigma_x term of strength eps on every site.
std::vector<Perturbation> uniform_sigma_x_perturbation(int n, double eps);

/// -1/2 sum_i omega_i sigma_z^(i)
Operator h_free(const ChainSpec& spec);
/// h_free - lambda sum_<ij> sigma_x^(i) sigma_x^(j)
Operator h_ising(const ChainSpec& spec);
/// h_free - lambda (XX on odd bonds, YY on even bonds), bonds 1-based.
Operator h_xy(const ChainSpec& spec);
/// h + sum of the spec's perturbation terms.
Operator add_perturbation(const Operator& h, const ChainSpec& spec);

/// Model-dispatched interacting Hamiltonian including perturbations.
/// n = 1 yields the free single-qubit Hamiltonian.
Operator hamiltonian(const ChainSpec& spec);

/// Eigendecomposition of hamiltonian(spec), parity resolved unless a
/// perturbation breaks the parity symmetry.
Spectrum chain_spectrum(const ChainSpec& spec);

struct LogicalQubit {
    StateVector ket0;
    StateVector ket1;
    double omega10 = 0.0;
};

LogicalQubit logical_qubit(const ChainSpec& spec);
LogicalQubit logical_qubit(const Spectrum& spectrum);

/// Closed-form lambda -> infinity lowest-manifold states of the XY chain,
/// n in {3, 4}.
std::vector<StateVector> appendix_a_states(int n);

}  // namespace usc
