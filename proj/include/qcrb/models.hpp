#pragma once

#include "qcrb/core.hpp"
#include "qcrb/rng.hpp"
#include "qcrb/vantrees.hpp"

namespace qcrb::models {

/// Qubit (I + theta . sigma)/2 on the open unit ball, p = 3.
ParametricModel full_bloch();
/// Qubit (I + theta_1 sigma_x + theta_2 sigma_y)/2 on the open unit disc, p = 2.
ParametricModel equatorial();
/// Qubit (I + t sigma_z)/2 on t in (-1, 1), p = 1.
ParametricModel bloch_line();
/// Pure states |phi(theta)> = (sqrt(1 - |theta|^2), theta_1 + i theta_2, ...),
/// p = 2(d - 1) real parameters on a ball of radius < 1.
ParametricModel pure_state(int d);
/// Classical diagonal family diag(mu_1 + theta_1, ..., mu_d - sum theta),
/// p = d - 1.
ParametricModel diagonal(const RealVector& mu);

// ---- fidelity losses ------------------------------------------------------
// Each is an exact quadratic embedding: the quadratic form equals 1 - F for
// every pair of states in the family, not just to second order.

/// Bloch-coordinate models (p = 1, 2, 3): psi = (theta, sqrt(1 - |theta|^2)),
/// Gtilde = I/4, so (psi-hat - psi)^T Gtilde (...) = 1 - F exactly.
vantrees::LossSpec qubit_fidelity_loss(int p);

/// Pure-state families: psi = (Re rho_ij, Im rho_ij), Gtilde = I/2, using
/// 1 - F = |rho - sigma|_F^2 / 2 for pure states.
vantrees::LossSpec pure_fidelity_loss(const ParametricModel& model);

/// Dispatch on the builtin model name.
vantrees::LossSpec fidelity_loss(const ParametricModel& model);

// ---- POVM factories -------------------------------------------------------

/// Projectors onto the computational basis.
Povm basis_povm(int d);
/// Projectors onto the columns of a unitary.
Povm rotated_basis_povm(const Matrix& u);
/// Qubit projectors (I +/- axis . sigma)/2 for a unit axis.
Povm spin_axis_povm(const Eigen::Vector3d& axis);
/// The six-outcome x/y/z mixture {(1/3) (I +/- sigma_k)/2}.
Povm pauli6_povm();
/// Random POVM from Ginibre operators A_i, normalized M_i = S^-1/2 A_i S^-1/2.
Povm random_rank1_povm(int d, int n_outcomes, Rng& rng);

}  // namespace qcrb::models
