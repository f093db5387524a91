#pragma once

#include "qcrb/core.hpp"
#include "qcrb/rng.hpp"
#include "qcrb/solver.hpp"

namespace qcrb::gaussian {

/// Commutator table of the mode variables: block-diagonal
/// Diag(Omega, ..., Omega, 0, ..., 0) with n_modes blocks Omega = [[0,1],[-1,0]]
/// followed by n_classical zero rows/columns.
struct SymplecticForm {
  int n_modes = 0;
  int n_classical = 0;
  RealMatrix matrix;

  static SymplecticForm standard(int n_modes, int n_classical);
  int dim() const { return 2 * n_modes + n_classical; }
};

/// Mean vector plus covariance; valid when V + (i/2)S is positive semidefinite.
struct GaussianState {
  RealVector mean;
  RealMatrix covariance;
};

/// Family of Gaussian states with fixed covariance and mean L h, h in R^k.
struct GaussianShift {
  SymplecticForm symplectic;
  RealMatrix covariance;  // m x m
  RealMatrix mean_map;    // m x k, full column rank

  GaussianShift(SymplecticForm s, RealMatrix v, RealMatrix l);
  int dim() const { return static_cast<int>(covariance.rows()); }
  int param_dim() const { return static_cast<int>(mean_map.cols()); }
};

/// Linear estimator Y^(i) = sum_j y_ij X_j plus independent auxiliary noise.
struct LinearMeasurement {
  RealMatrix y_coeffs;        // k x m
  RealMatrix aux_covariance;  // k x k, must dominate (i/2) y S y^T
};

struct UncertaintyReport {
  bool valid = false;
  double min_eigenvalue = 0.0;
};

/// Smallest eigenvalue of V + (i/2)S; valid when >= -1e-9.
UncertaintyReport uncertainty_check(const RealMatrix& v, const RealMatrix& s);
UncertaintyReport uncertainty_check(const RealMatrix& v, const SymplecticForm& s);

struct SingleModeResult {
  double risk = 0.0;
  Eigen::Matrix2d y0;  // optimal auxiliary covariance
};

/// Closed-form single-mode minimax risk tr(GV) + sqrt(det G) and the optimal
/// auxiliary covariance Y0 = (1/2) O Diag(sqrt(g2/g1), sqrt(g1/g2)) O^T.
SingleModeResult single_mode_minimax(const Eigen::Matrix2d& g, const Eigen::Matrix2d& v);

struct AbsSymplecticReport {
  double lhs = 0.0;  // tr(V)
  double rhs = 0.0;  // tr|S| / 2
};

/// tr(V) >= tr|S|/2 for any V with V + (i/2)S >= 0, with equality at V = |S|/2.
AbsSymplecticReport abs_symplectic_lemma(const RealMatrix& v, const RealMatrix& s);

struct MinimaxResult {
  double risk = 0.0;
  LinearMeasurement measurement;
  SolverDiagnostics convergence;
};

/// Minimize tr(G y V y^T) + (1/2) tr|sqrt(G) y S y^T sqrt(G)| over y with
/// y L = I.  The returned measurement attains the risk: its auxiliary
/// covariance is the congruence-optimal G^{-1/2}|sqrt(G) S^Y sqrt(G)|G^{-1/2}/2.
MinimaxResult multimode_minimax(const GaussianShift& shift, const RealMatrix& g,
                                const SolverOptions& options = {});

/// Draw n samples of the measurement outcome at parameter h:
/// Normal(h, y V y^T + aux_covariance).  Rows of the result are samples.
RealMatrix sample_covariant_measurement(const GaussianShift& shift,
                                        const LinearMeasurement& measurement,
                                        const RealVector& h, int n_samples, Rng& rng);

}  // namespace qcrb::gaussian
