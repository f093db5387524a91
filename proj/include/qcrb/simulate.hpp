#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "qcrb/core.hpp"
#include "qcrb/fisher.hpp"
#include "qcrb/models.hpp"
#include "qcrb/rng.hpp"
#include "qcrb/vantrees.hpp"

namespace qcrb::simulate {

/// How each of the N copies is measured.
struct MeasurementScheme {
  enum class Kind { PerCopyFixed, RandomBasis, TwoStepAdaptive };

  Kind kind = Kind::PerCopyFixed;
  std::optional<Povm> povm;  // PerCopyFixed
  double fraction = 0.0;     // TwoStepAdaptive: share of copies spent on stage 1
  /// TwoStepAdaptive: maps the stage-1 estimate to the stage-2 per-copy POVM.
  std::function<Povm(const ParametricModel&, const RealVector&)> tuner;
  std::string description;

  static MeasurementScheme per_copy_fixed(Povm povm);
  static MeasurementScheme random_basis();
};

/// Outcomes of measuring N copies.  Fixed-POVM blocks are stored as outcome
/// counts (sufficient and order-free); random-basis copies are stored
/// per copy, as the observed projector's Bloch axis for qubits or as
/// (basis, outcome) records in general.
struct Dataset {
  struct Segment {
    Povm povm;
    std::vector<long> counts;
  };
  struct CopyRecord {
    Matrix basis;  // columns are the measured orthonormal basis
    int outcome = 0;
  };

  long n_copies = 0;
  std::vector<Segment> segments;
  std::vector<Eigen::Vector3d> qubit_axes;
  std::vector<CopyRecord> generic;
  bool stage1_fallback = false;  // two-step stage 1 estimate was degenerate
  bool stage2_empty = false;     // fraction so large that stage 2 got no copies

  bool empty() const {
    return segments.empty() && qubit_axes.empty() && generic.empty();
  }
};

struct Estimator {
  enum class Kind { Mle, BayesMean };
  Kind kind = Kind::Mle;
  std::shared_ptr<vantrees::Prior> prior;  // BayesMean

  static Estimator mle();
  static Estimator bayes_mean(vantrees::Prior prior);
};

struct MleDiagnostics {
  RealVector grid_start;
  int iterations = 0;
  bool converged = false;
  bool flat = false;  // multiple grid points tie at the optimum
};

/// Measure N copies of rho(theta) under the scheme.  DomainError outside the
/// model domain or for N < 1.
Dataset sample_outcomes(const ParametricModel& model, const RealVector& theta,
                        const MeasurementScheme& scheme, long n_copies,
                        std::uint64_t seed);

/// Log-likelihood of theta given the dataset; -inf when an observed outcome
/// has zero probability.  `max_per_copy` caps the per-copy records used
/// (0 = all), for cheap scoring on initialization grids.
double log_likelihood(const ParametricModel& model, const Dataset& data,
                      const RealVector& theta, long max_per_copy = 0);

/// Maximum-likelihood estimate: 21-per-axis domain grid (scored on a copy
/// subsample) followed by Nelder-Mead refinement of the full likelihood to
/// parameter tolerance 1e-6.  DegenerateDataError when every grid point has
/// zero likelihood.
RealVector mle_estimate(const ParametricModel& model, const Dataset& data,
                        MleDiagnostics* diag = nullptr);

/// Posterior mean under the prior by quadrature over its support.
RealVector bayes_mean_estimate(const ParametricModel& model, const Dataset& data,
                               const vantrees::Prior& prior);

struct RiskReport {
  long n_copies = 0;
  int reps = 0;
  double empirical_risk = 0.0;  // N x mean loss
  double std_error = 0.0;       // sample std of N x loss, / sqrt(reps)
  double mean_loss = 0.0;
  double bound = 0.0;           // Holevo (fixed theta) or van Trees (prior)
  std::string bound_kind;
  bool bound_violation = false;  // empirical < bound - 3 std errors
  std::string loss_kind;
  std::string scheme;
  std::string estimator;
};

using ThetaOrPrior = std::variant<RealVector, vantrees::Prior>;

/// Monte Carlo risk of scheme+estimator against the matching lower bound.
/// Repetitions use independent substreams of `seed`, so reports are
/// bit-reproducible for fixed inputs.  Requires reps >= 100.
RiskReport risk_experiment(const ParametricModel& model, const ThetaOrPrior& target,
                           const MeasurementScheme& scheme, const Estimator& estimator,
                           const vantrees::LossSpec& loss, long n_copies, int reps,
                           std::uint64_t seed);

struct CovariantInfoReport {
  RealMatrix average_info;      // mean Fisher information over random bases
  RealMatrix helstrom;          // H at the reference point
  RealMatrix ratio;             // average_info * H^{-1}, expected ~ I/2
  double trace_h_inv_info = 0;  // expected ~ d - 1
  double max_single_trace = 0;  // max single-basis trace(H^{-1} I_M)
  int n_bases = 0;
};

/// Average the Fisher information of Haar-random basis measurements at the
/// reference point of the pure-state chart in dimension d.
CovariantInfoReport covariant_info_check(int d, int n_bases, std::uint64_t seed);

/// Two-step adaptive scheme: stage 1 measures an informationally complete
/// POVM on ceil(fraction*N) copies, stage 2 measures the projective POVM
/// maximizing trace(K0 I_M) at the stage-1 estimate (grid search over axes
/// for qubits, over seeded random bases otherwise).
MeasurementScheme two_step_scheme(const ParametricModel& model,
                                  const vantrees::LossSpec& loss, double fraction);

/// Per-copy information field of a scheme (used to fill van Trees bounds):
/// the POVM's Fisher information, the random-basis average over a fixed
/// deterministic set of bases, or the tuned stage-2 POVM's information.
std::function<fisher::InfoMatrix(const RealVector&)> scheme_info_field(
    const ParametricModel& model, const MeasurementScheme& scheme);

}  // namespace qcrb::simulate
