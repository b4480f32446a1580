// circuit.hpp - three coupled 3JJ flux qubits reduced to an effective spin model
//
// Node order of the 6x6 capacitance matrix: (phi1, phi1', phi2, phi2', phi3,
// phi3'). Qubits 1-2 share a coupling junction between phi1' and phi2;
// qubits 2-3 share the capacitor C_g between phi2' and phi3. Capacitances
// are in units of C, energies in units of E_C = e^2 / 2C.
#pragma once

#include <array>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "usc/opcore.hpp"

namespace usc {

struct CircuitParams {
    double alpha = 0.65;
    double beta = 0.1;
    double gamma_cap = 5.0;
    double ej_ec = 50.0;
    double ejg_ej = 0.01;
    double phi_ext = std::numbers::pi;
    int charge_cutoff = 10;
    /// H_charge = factor * E_C * n^T (C Cbar^{-1}) n with n in Cooper pairs;
    /// 4 corresponds to E_C = e^2 / 2C.
    double charge_energy_factor = 4.0;
    /// Levels kept per qubit for matrix elements and the second-order zz.
    int levels = 6;

    void validate() const;
};

/// [[1+a+b, -(a+b)], [-(a+b), 1+a+b]] in units of C.
Eigen::Matrix2d qubit_capacitance(const CircuitParams& p);

/// Full 6x6 matrix with C_g = gamma C between phi2' and phi3.
Eigen::MatrixXd capacitance_matrix(const CircuitParams& p);

struct InverseBlocks {
    Eigen::MatrixXd inverse;
    std::array<Eigen::Matrix2d, 3> qubit;
    /// Off-diagonal block (qubit 2 rows, qubit 3 columns).
    Eigen::Matrix2d coupling;
};

InverseBlocks inverse_blocks(const Eigen::MatrixXd& ctilde);

/// Eigenpairs of one qubit and operators in its lowest-level eigenbasis.
/// Operator keys: n1, n2 (Cooper-pair charges of phi, phi'), cos1, sin1,
/// cos2, sin2.
struct QubitLevels {
    Eigen::VectorXd energies;
    std::map<std::string, Operator> ops;
    /// max |E_k(cutoff) - E_k(cutoff + 2)| / max(|E_k|, 1) over kept levels
    double convergence = 0.0;
};

/// `check_convergence` repeats the diagonalisation at cutoff + 2 and throws
/// NumericalError("cutoff too small") beyond 1e-6 relative.
QubitLevels flux_qubit_levels(const CircuitParams& p, const Eigen::Matrix2d& inv_block,
                              bool check_convergence = true);

/// coefficients c_{kl} of sigma_k (x) sigma_l, k, l in {I, x, y, z}
struct CouplingTensor {
    Eigen::Matrix4d full = Eigen::Matrix4d::Zero();

    Eigen::Matrix3d g() const { return full.bottomRightCorner<3, 3>(); }
    double at(Axis k, Axis l) const {
        return full(static_cast<int>(k) + 1, static_cast<int>(l) + 1);
    }
};

struct SpinModel {
    /// lowest gaps, E_C units
    std::array<double, 3> omega_q{};
    /// qubits 1-2 junction coupling and qubits 2-3 capacitive coupling, E_C units
    CouplingTensor g_jj;
    CouplingTensor g_c;
    /// phase applied to |e> of each qubit so the junction sin element is real
    std::array<double, 3> frame_angle{};
    /// second-order zz = E11 - E10 - E01 + E00 through non-computational levels
    double zz_jj = 0.0;
    double zz_c = 0.0;
    std::array<double, 3> convergence{};
    int charge_cutoff = 0;
    /// largest imaginary part dropped from the Pauli coefficients
    double max_imag = 0.0;
};

SpinModel truncate_to_spins(const CircuitParams& p);

}  // namespace usc
