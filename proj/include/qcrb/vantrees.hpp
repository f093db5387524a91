#pragma once

#include <functional>
#include <string>

#include "qcrb/core.hpp"
#include "qcrb/fisher.hpp"
#include "qcrb/holevo.hpp"
#include "qcrb/rng.hpp"

namespace qcrb::vantrees {

/// Smooth prior density on a compact box or ball support.  Admissible priors
/// integrate to 1 and vanish on the boundary of the support.
struct Prior {
  Domain support;
  std::function<double(const RealVector&)> density;
  /// Analytic gradient; leave empty to fall back to finite differences.
  std::function<RealVector(const RealVector&)> gradient;
  /// Upper bound on the density, used for rejection sampling (0 = unknown).
  double density_cap = 0.0;
  std::string name;
};

/// Quadratic loss (psihat - psi)^T Gtilde (psihat - psi) on a derived
/// parameter psi(theta) in R^q.
struct LossSpec {
  int p = 0;  // model parameter dimension
  int q = 0;  // derived parameter dimension
  std::function<RealVector(const RealVector&)> psi;
  std::function<RealMatrix(const RealVector&)> psi_jacobian;  // q x p
  std::function<RealMatrix(const RealVector&)> g_tilde;       // q x q SPD
  std::string name;

  /// Induced p x p weight psi'^T Gtilde psi' on the model parameter.
  RealMatrix g0(const RealVector& theta) const;
};

/// Trial matrix field C(theta) (q x p) entering the Bayesian bound.
struct CField {
  std::function<RealMatrix(const RealVector&)> c;
};

/// psi = theta, Gtilde = identity.
LossSpec identity_loss(int p);

// ---- prior factories ------------------------------------------------------

/// Separable prod_i (2/L_i) sin^2(pi (theta_i - a_i)/L_i) on a box.
Prior cos2_box_prior(const RealVector& lo, const RealVector& hi);
/// (1 - (|theta|/r)^2)^2 bump, normalized, on the centered ball.
Prior ball_bump_prior(int dim, double radius);
/// Constant density on the centered ball (violates the boundary-vanishing
/// requirement; useful as a squeeze input).
Prior uniform_ball_prior(int dim, double radius);

/// Gradient of the density: analytic when available, else central differences.
RealVector prior_gradient(const Prior& prior, const RealVector& theta);

/// Rejection sample from the prior (uses density_cap, estimating one when
/// absent).
RealVector sample_prior(const Prior& prior, Rng& rng);

struct PriorCheckReport {
  double normalization = 0.0;  // quadrature integral of the density
  double boundary_max = 0.0;   // max density over boundary sample points
  bool normalized = false;     // |normalization - 1| <= 1e-4
  bool vanishes = false;       // boundary_max < 1e-8
  bool ok = false;
};

PriorCheckReport check_prior(const Prior& prior);

struct LossCheckReport {
  double jacobian_defect = 0.0;  // max |FD - analytic| entry
  double g0_min_eigenvalue = 0.0;
  bool ok = false;
};

LossCheckReport check_loss(const LossSpec& loss, const RealVector& theta);

// ---- quadrature -----------------------------------------------------------

struct QuadratureRule {
  std::vector<RealVector> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, RealVector& nodes, RealVector& weights);

/// Tensor Gauss-Legendre rule on a box.
QuadratureRule box_rule(const RealVector& lo, const RealVector& hi,
                        int n_per_axis);
/// Spherical rule on a centered ball: Gauss-Legendre in radius, spectrally
/// convergent grids on the angles.  `n_radial` controls the overall density.
QuadratureRule ball_rule(int dim, double radius, int n_radial);

/// Rule over a Domain at refinement level 0, 1, 2, ... (node counts double).
QuadratureRule support_rule(const Domain& support, int level);

struct QuadratureOptions {
  double rel_tol = 1e-3;
  int max_level = 3;
  double divergence_cap = 1e12;
};

struct QuadratureResult {
  RealVector value;
  long nodes = 0;
  int level = 0;
  bool converged = false;
};

/// Integrate a vector-valued integrand over the support, doubling the rule
/// until successive levels agree to rel_tol on every component.
/// DivergenceError when components blow past divergence_cap under refinement;
/// ConvergenceError when the levels never stabilize.
QuadratureResult integrate_adaptive(
    const Domain& support, int out_dim,
    const std::function<RealVector(const RealVector&)>& f,
    const QuadratureOptions& opts = {});

// ---- bound evaluation -----------------------------------------------------

/// C(theta) = Gtilde psi' V0(theta) with V0 the minimizer for the induced
/// weight G0 = psi'^T Gtilde psi'.  Evaluations are memoized; solver failures
/// propagate with the node location appended.
CField optimal_c_field(const ParametricModel& model, const LossSpec& loss,
                       const SolverOptions& options = {});

/// Average per-copy information field saturating trace(K0 I) = C_G0,
/// namely I(theta) = V0(theta)^{-1}.  Memoized like optimal_c_field.
std::function<fisher::InfoMatrix(const RealVector&)> dual_cap_info_field(
    const ParametricModel& model, const LossSpec& loss,
    const SolverOptions& options = {});

/// Prior-information functional E_pi[(C pi)'^T Gtilde^{-1} (C pi)' / pi^2]
/// with the divergence-style derivative of the product field taken by central
/// differences (step 1e-4).  DivergenceError when mesh refinement blows up.
double j_pi(const Prior& prior, const CField& c_field, const LossSpec& loss);

struct VanTreesBreakdown {
  double rhs = 0.0;
  double numerator_mean = 0.0;  // E_pi trace(C psi'^T)
  double info_mean = 0.0;       // E_pi trace(Gtilde^{-1} C I C^T)
  double j_value = 0.0;
  long nodes = 0;
};

/// Right side of the Bayesian bound, scaled to bound N * E_pi trace(Gtilde V):
/// (E_pi trace C psi'^T)^2 / (E_pi trace Gtilde^{-1} C I C^T + J(pi)/N).
VanTreesBreakdown van_trees_breakdown(
    const ParametricModel& model, const Prior& prior, const LossSpec& loss,
    const CField& c_field, long n_copies,
    const std::function<fisher::InfoMatrix(const RealVector&)>& info_field);

double van_trees_rhs(
    const ParametricModel& model, const Prior& prior, const LossSpec& loss,
    const CField& c_field, long n_copies,
    const std::function<fisher::InfoMatrix(const RealVector&)>& info_field);

/// E_pi C_G0(theta): the asymptotic lower bound on N times the Bayes risk.
double asymptotic_bound(const ParametricModel& model, const Prior& prior,
                        const LossSpec& loss,
                        const SolverOptions& options = {});

struct SqueezeInfo {
  double factor = 0.0;    // achieved sup (squeezed / original density)
  bool truncated = false; // whether any mass was actually removed
};

/// Smoothly truncate the prior so the result vanishes outside the
/// (1 - delta)-scaled support while staying below factor * pi pointwise; the
/// taper width is tuned so factor <= 1 + eps whenever the removed mass allows
/// it, and the achieved factor is reported through `info`.
/// PriorError when the surviving mass is too small to normalize.
Prior prior_squeeze(const Prior& prior, double eps, double delta,
                    SqueezeInfo* info = nullptr);

}  // namespace qcrb::vantrees
