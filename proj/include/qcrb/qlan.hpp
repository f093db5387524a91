#pragma once

#include <string>

#include "qcrb/core.hpp"
#include "qcrb/gaussian.hpp"

namespace qcrb::qlan {

inline constexpr double kEigGapFloor = 1e-6;  // nondegeneracy requirement

/// Local parameter of the i.i.d. model around a diagonal reference state:
/// u shifts the eigenvalues, zeta fills the off-diagonal entries
/// (lexicographic pair order (j,k), j < k).
struct LocalParams {
  RealVector u;            // length d-1
  Eigen::VectorXcd zeta;   // length d(d-1)/2

  static LocalParams zero(int d);
  int dim() const { return static_cast<int>(u.size()); }
};

/// Reference state, local parameter, and the copy count N of the model
/// rho_{h/sqrt(N)}^{tensor N}.
struct LocalModel {
  RealVector mu;      // decreasing, strictly positive, distinct eigenvalues
  LocalParams h;
  long n_copies = 0;

  LocalModel(RealVector mu, LocalParams h, long n_copies);
  int dim() const { return static_cast<int>(mu.size()); }
};

/// The d^2 - 1 zero-mean collective observables {Q_jk, P_jk, C_i}, pairs in
/// lexicographic order followed by the classical C_i.
struct CltBasis {
  int d = 0;
  std::vector<Matrix> operators;
  std::vector<std::string> labels;
  int n_pairs() const { return d * (d - 1) / 2; }
};

/// Gaussian limit of the local model: classical multinomial block plus one
/// bosonic mode per eigenvalue pair.
struct LimitGaussian {
  RealMatrix classical_cov;            // (d-1) x (d-1)
  std::vector<double> pair_variances;  // per-pair variance from the general recipe
  std::vector<double> pair_variances_display;  // the 1/(2(mu_j - mu_k)) variant
  RealMatrix mean_map;                 // basis-ordered mean of h (m x m)
  RealMatrix covariance;               // full m x m limit covariance (basis order)
  gaussian::SymplecticForm symplectic; // canonical Diag(Omega,...,0) form
};

/// Basis operators at a diagonal reference state (DegeneracyError when the
/// spectrum has gaps below kEigGapFloor or nonpositive eigenvalues).
CltBasis clt_basis(const QuantumState& rho0);

/// Density matrix of the perturbed state: diagonal mu + (u, -sum u),
/// off-diagonal zeta (below the diagonal; conjugates above).
Matrix local_state_matrix(const RealVector& mu, const LocalParams& h);

/// rho_{h/sqrt(N)} as a validated state.
QuantumState local_state(const LocalModel& model);

/// tr(rho0 X_a X_b) over the CLT basis; Re is the limit covariance, 2 Im the
/// limit symplectic form.
Matrix quantum_clt_covariance(const QuantumState& rho0, const CltBasis& basis);

/// Limit Gaussian model of the local family around rho0.
LimitGaussian limit_model(const QuantumState& rho0);

/// L[i][a] = tr(d rho / d h_i . X_a) at theta0 for a submodel expressed in the
/// local chart (rho(theta0) = rho0 required within 1e-8).
RealMatrix l_map(const ParametricModel& submodel, const RealVector& theta0,
                 const QuantumState& rho0, const CltBasis& basis);

/// Canonical full local chart around diag(mu): parameters
/// (u_1..u_{d-1}, Re zeta_1, Im zeta_1, ...) with analytic derivatives.
ParametricModel local_chart_model(const RealVector& mu);

/// Gaussian shift model reached in the limit, with mean map L^T so that the
/// shift parameter is the submodel's local parameter.
gaussian::GaussianShift limit_shift(const QuantumState& rho0, const RealMatrix& l);

struct CltObservableReport {
  std::string label;
  double predicted_mean = 0.0;
  double predicted_var = 0.0;          // general recipe Re tr(rho0 X^2)
  double predicted_var_display = 0.0;  // per-pair 1/(2(mu_j-mu_k)) variant
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double ks_distance = 0.0;            // against the general-recipe normal
  std::string var_match;               // which prediction the data favors
};

/// Measure each collective observable X_a(N)/sqrt(N) on rho_{h/sqrt(N)}^{x N}
/// as a sum of N single-copy outcomes, reps times, and compare with the
/// predicted normal law.
std::vector<CltObservableReport> clt_empirical_check(const LocalModel& model, int reps,
                                                     std::uint64_t seed);

}  // namespace qcrb::qlan
