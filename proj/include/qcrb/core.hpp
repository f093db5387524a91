#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qcrb/errors.hpp"
#include "qcrb/linalg.hpp"

namespace qcrb {

// Validation tolerances, pinned here so every caller agrees on them.
inline constexpr double kHermitianTol = 1e-10;       // |A - A^dagger| entries
inline constexpr double kEigenvalueTol = 1e-10;      // allowed negative dip
inline constexpr double kTraceTol = 1e-10;           // |tr rho - 1|
inline constexpr double kPovmSumTol = 1e-8;          // |sum M_x - I| entries
inline constexpr double kProbSumTol = 1e-8;          // |sum p_x - 1|
inline constexpr double kProbNegTol = 1e-12;         // clamp window for p_x < 0
inline constexpr double kImagProbTol = 1e-8;         // |Im tr(rho M)| ceiling
inline constexpr double kFdStep = 1e-5;              // model derivative fallback step

/// Density matrix: Hermitian, unit trace, positive semidefinite
/// (eigenvalues >= -kEigenvalueTol tolerated and clamped conceptually).
class QuantumState {
 public:
  explicit QuantumState(Matrix rho);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }
  double min_eigenvalue() const;
  bool is_near_pure(double tol = 1e-8) const;

 private:
  Matrix rho_;
};

/// Positive operator-valued measure: Hermitian elements summing to identity.
class Povm {
 public:
  Povm(int dim, std::vector<Matrix> elements);

  int dim() const { return dim_; }
  int n_outcomes() const { return static_cast<int>(elements_.size()); }
  const Matrix& element(int x) const { return elements_[x]; }
  const std::vector<Matrix>& elements() const { return elements_; }

 private:
  int dim_;
  std::vector<Matrix> elements_;
};

/// Region of parameter space a model is defined on.
struct Domain {
  enum class Kind { All, Ball, Box };

  Kind kind = Kind::All;
  int dim = 0;
  double radius = 0.0;      // Ball: ||theta|| < radius
  RealVector lo, hi;        // Box bounds

  static Domain all(int dim);
  static Domain ball(int dim, double radius);
  static Domain box(RealVector lo, RealVector hi);

  bool contains(const RealVector& theta) const;
  /// Axis-aligned bounding box, used to lay out search grids.
  void bounding_box(RealVector& lo_out, RealVector& hi_out) const;
};

/// Smooth family theta -> rho(theta).  Derivatives are analytic when supplied,
/// otherwise central finite differences with step kFdStep.
class ParametricModel {
 public:
  using StateFn = std::function<Matrix(const RealVector&)>;
  using DerivFn = std::function<std::vector<Matrix>(const RealVector&)>;

  ParametricModel(int param_dim, Domain domain, StateFn state_fn,
                  DerivFn deriv_fn = nullptr, std::string name = "custom");

  int param_dim() const { return param_dim_; }
  const Domain& domain() const { return domain_; }
  const std::string& name() const { return name_; }

  QuantumState state(const RealVector& theta) const;
  /// d rho / d theta_i, each hermitized; throws DomainError outside the domain.
  std::vector<Matrix> derivatives(const RealVector& theta) const;

 private:
  int param_dim_;
  Domain domain_;
  StateFn state_fn_;
  DerivFn deriv_fn_;
  std::string name_;
};

/// Probability vector over measurement outcomes.
struct OutcomeDistribution {
  std::vector<double> probabilities;
  int n_outcomes() const { return static_cast<int>(probabilities.size()); }
};

/// Born rule p_x = tr(rho M_x), validated and clamped.
OutcomeDistribution born_distribution(const QuantumState& rho, const Povm& povm);

/// Qubit state (I + theta . sigma)/2 for ||theta|| <= 1.
QuantumState bloch_state(const Eigen::Vector3d& theta);

/// Bloch vector (tr(rho sigma_x), tr(rho sigma_y), tr(rho sigma_z)) of a qubit state.
Eigen::Vector3d bloch_vector(const QuantumState& rho);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1].
double fidelity(const QuantumState& rho, const QuantumState& sigma);

/// Closed-form qubit fidelity from Bloch vectors.
double bloch_fidelity(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Orthonormal Hermitian basis of d x d matrices under <A,B> = tr(AB):
/// identity/sqrt(d) first, then pair (symmetric, antisymmetric) elements for
/// each index pair in lexicographic order, then diagonal traceless elements.
/// For d = 2 this is {I, sigma_x, sigma_y, sigma_z}/sqrt(2).
std::vector<Matrix> hermitian_basis(int d);

/// The traceless tail of hermitian_basis(d) (d^2 - 1 elements).
std::vector<Matrix> traceless_hermitian_basis(int d);

}  // namespace qcrb
