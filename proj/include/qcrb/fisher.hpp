#pragma once

#include "qcrb/core.hpp"

namespace qcrb::fisher {

enum class InfoKind { Measurement, Helstrom, AveragePerCopy };

/// Symmetric positive semidefinite information matrix tagged with its origin.
struct InfoMatrix {
  RealMatrix matrix;
  InfoKind kind = InfoKind::Measurement;
};

// Numerical policy knobs for this module.
inline constexpr double kZeroProbTol = 1e-12;   // outcome treated as unreachable
inline constexpr double kZeroDerivTol = 1e-8;   // derivative allowed at unreachable outcome
inline constexpr double kSldMinEig = 1e-10;     // state eigenvalue floor for the SLD path
inline constexpr double kHessianStep = 1e-3;    // fidelity-curvature step (Richardson refined)

/// Classical Fisher information of the outcome distribution of `povm` at theta.
InfoMatrix fisher_info(const ParametricModel& model, const RealVector& theta,
                       const Povm& povm);

/// Symmetric logarithmic derivatives: solutions of d_i rho = (L_i rho + rho L_i)/2,
/// computed in the eigenbasis of rho.  Requires all eigenvalues > kSldMinEig.
std::vector<Matrix> sld(const ParametricModel& model, const RealVector& theta);

/// Quantum information matrix H_ij = Re tr(rho L_i L_j) via the SLD path when the
/// state is full rank, otherwise via the fidelity-curvature path.
InfoMatrix helstrom_info(const ParametricModel& model, const RealVector& theta);

/// Quantum information matrix from the local curvature of 1 - fidelity:
/// H = 2 * Hessian_delta [1 - F(rho(theta + delta), rho(theta))] at delta = 0,
/// central differences with one Richardson refinement.  Works at rank-deficient
/// states where the SLD system is unavailable.
InfoMatrix helstrom_info_fidelity(const ParametricModel& model, const RealVector& theta);

/// Per-copy information of a collective measurement on n_copies tensor copies:
/// fisher_info of the product model divided by n_copies.  The product dimension
/// dim^n_copies is capped at 4096 (ResourceError beyond).
InfoMatrix average_info(const ParametricModel& model, const RealVector& theta,
                        const Povm& collective_povm, int n_copies);

}  // namespace qcrb::fisher
