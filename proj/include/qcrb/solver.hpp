#pragma once

#include <functional>
#include <vector>

#include "qcrb/linalg.hpp"

namespace qcrb {

/// Options shared by the nonsmooth trace-norm minimizers (Holevo primal,
/// multimode Gaussian risk).  The |.| term is smoothed as sqrt(x^2 + eps^2)
/// and eps is driven down the continuation ladder.
struct SolverOptions {
  int max_iterations = 50000;          // across all continuation stages
  double objective_tol = 1e-9;         // relative best-value change over stall_window
  int stall_window = 50;
  double constraint_tol = 1e-8;        // feasibility residual ceiling
  std::vector<double> smoothing_stages = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  std::uint64_t seed = 0;              // reserved; the solver itself is deterministic
};

struct SolverDiagnostics {
  int iterations = 0;
  int stages_completed = 0;
  double constraint_violation = 0.0;
  double final_objective_delta = 0.0;
  bool converged = false;
};

namespace detail {

struct DescentResult {
  RealVector x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_delta = 0.0;
};

/// Monotone first-order descent for smooth convex objectives.
/// `fg(x, g)` returns f(x) and fills a gradient when g != nullptr.
/// Steps are seeded with a Barzilai-Borwein estimate (level-gap fallback)
/// and safeguarded by Armijo backtracking; deterministic throughout.
DescentResult minimize_smooth(
    const std::function<double(const RealVector&, RealVector*)>& fg, RealVector x0,
    int max_iterations, double objective_tol, int stall_window);

}  // namespace detail
}  // namespace qcrb
