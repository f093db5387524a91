#pragma once

#include <span>
#include <utility>

#include "qcrb/core.hpp"
#include "qcrb/solver.hpp"

namespace qcrb::holevo {

/// Symmetric positive definite weight for a quadratic loss.
struct WeightMatrix {
  RealMatrix matrix;
  explicit WeightMatrix(RealMatrix m);
  int dim() const { return static_cast<int>(matrix.rows()); }
};

/// Minimizer of the weighted-variance functional
///   tr(G Re Z) + tr|sqrt(G) Im Z sqrt(G)|  over locally unbiased observable
/// tuples, where Z_ij = tr(rho X_i X_j).  `value` is the resulting scalar
/// bound on n * tr(G V) for any unbiased scheme; `v_opt` is the matching
/// covariance lower bound, `dual_k = v_opt G v_opt` the weight whose linear
/// functional tr(K I) is capped by `dual_value` over attainable informations.
struct HolevoSolution {
  double value = 0.0;
  std::vector<Matrix> x_opt;
  Matrix z;            // tr(rho X_i X_j) at the optimum (p x p Hermitian)
  RealMatrix v_opt;    // p x p real symmetric, v_opt >= z
  RealMatrix dual_k;
  double dual_value = 0.0;
  SolverDiagnostics convergence;
};

/// Z_ij = tr(rho(theta) X_i X_j) for a tuple of Hermitian observables.
Matrix z_matrix(const ParametricModel& model, const RealVector& theta,
                std::span<const Matrix> xs);

/// Solve the variance-bound program at theta with weight G.
/// Observables satisfy tr(d_i rho X_j) = delta_ij exactly (affine elimination);
/// the component along the identity is fixed by closed-form minimization, the
/// traceless remainder by smoothed continuation descent.
HolevoSolution holevo_bound(const ParametricModel& model, const RealVector& theta,
                            const WeightMatrix& weight,
                            const SolverOptions& options = {});

/// Dual weight K = V G V and its cap (equal to the primal value).
/// Throws SingularError when v_opt is singular.
std::pair<WeightMatrix, double> dual_from_primal(const HolevoSolution& solution,
                                                 const WeightMatrix& weight);

struct DualBoundReport {
  double cap = 0.0;            // C^K
  double max_value = 0.0;      // largest tr(K I_M) seen
  std::size_t argmax = 0;
  std::size_t n_checked = 0;
  double tolerance = 1e-6;
  bool holds = false;
};

/// Check tr(K0 I_M) <= cap + 1e-6 for the Fisher information of each POVM.
DualBoundReport verify_dual_bound(const ParametricModel& model, const RealVector& theta,
                                  const RealMatrix& k0, double cap,
                                  std::span<const Povm> povms);

struct SupportStructureReport {
  bool ok = false;
  double worst_slack = 0.0;    // min over pairs of tr(G' V(G)) - C_{G'}
  std::size_t n_weights = 0;
  std::vector<double> values;  // C_G for each supplied weight
};

/// Cross-support consistency of the covariance set: every optimizer V(G)
/// (and midpoints of pairs) must respect tr(G' V) >= C_{G'} - 1e-5.
SupportStructureReport support_structure_check(const ParametricModel& model,
                                               const RealVector& theta,
                                               std::span<const WeightMatrix> weights,
                                               const SolverOptions& options = {});

}  // namespace qcrb::holevo
