#include "qcrb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "qcrb/holevo.hpp"

namespace qcrb::simulate {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int env_thread_cap() {
  const char* raw = std::getenv("QCRB_THREADS");
  if (!raw) return 1;
  const int n = std::atoi(raw);
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(hw, 1));
}

RealVector domain_center(const Domain& domain) {
  if (domain.kind == Domain::Kind::Box) return 0.5 * (domain.lo + domain.hi);
  return RealVector::Zero(domain.dim);
}

Eigen::Vector3d uniform_axis(Rng& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double s = std::sqrt(std::max(1.0 - z * z, 0.0));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

Povm stage1_povm(int d, Rng& rng) {
  if (d == 2) return models::pauli6_povm();
  return models::random_rank1_povm(d, d * d, rng);
}

Dataset sample_two_step(const ParametricModel& model, const RealVector& theta,
                        const MeasurementScheme& scheme, long n_copies, Rng& rng) {
  if (!scheme.tuner) {
    throw DomainError("sample_outcomes: two-step scheme has no tuning rule");
  }
  Dataset data;
  data.n_copies = n_copies;
  const long n1 = std::min<long>(
      n_copies, static_cast<long>(std::ceil(scheme.fraction * n_copies)));
  const QuantumState rho = model.state(theta);
  const Povm first = stage1_povm(rho.dim(), rng);
  {
    const OutcomeDistribution dist = born_distribution(rho, first);
    Dataset::Segment seg{first, rng.multinomial(n1, dist.probabilities)};
    data.segments.push_back(std::move(seg));
  }
  RealVector pilot;
  try {
    pilot = mle_estimate(model, data);
  } catch (const DegenerateDataError&) {
    pilot = domain_center(model.domain());
    data.stage1_fallback = true;
  }
  const long n2 = n_copies - n1;
  if (n2 <= 0) {
    data.stage2_empty = true;
    return data;
  }
  const Povm tuned = scheme.tuner(model, pilot);
  const OutcomeDistribution dist = born_distribution(rho, tuned);
  Dataset::Segment seg{tuned, rng.multinomial(n2, dist.probabilities)};
  data.segments.push_back(std::move(seg));
  return data;
}

Dataset sample_with_rng(const ParametricModel& model, const RealVector& theta,
                        const MeasurementScheme& scheme, long n_copies, Rng& rng) {
  if (n_copies < 1) throw DomainError("sample_outcomes: need at least one copy");
  if (!model.domain().contains(theta)) {
    throw DomainError("sample_outcomes: theta outside the model domain");
  }
  switch (scheme.kind) {
    case MeasurementScheme::Kind::PerCopyFixed: {
      if (!scheme.povm) throw DomainError("sample_outcomes: scheme has no POVM");
      Dataset data;
      data.n_copies = n_copies;
      const OutcomeDistribution dist =
          born_distribution(model.state(theta), *scheme.povm);
      data.segments.push_back(
          Dataset::Segment{*scheme.povm, rng.multinomial(n_copies, dist.probabilities)});
      return data;
    }
    case MeasurementScheme::Kind::RandomBasis: {
      Dataset data;
      data.n_copies = n_copies;
      const QuantumState rho = model.state(theta);
      const int d = rho.dim();
      if (d == 2) {
        const Eigen::Vector3d a = bloch_vector(rho);
        data.qubit_axes.reserve(n_copies);
        for (long c = 0; c < n_copies; ++c) {
          const Eigen::Vector3d n = uniform_axis(rng);
          const double p0 = std::clamp(0.5 * (1.0 + n.dot(a)), 0.0, 1.0);
          const bool first = rng.uniform() < p0;
          data.qubit_axes.push_back(first ? n : Eigen::Vector3d(-n));
        }
        return data;
      }
      data.generic.reserve(n_copies);
      std::vector<double> probs(d);
      for (long c = 0; c < n_copies; ++c) {
        const Matrix u = rng.haar_unitary(d);
        for (int x = 0; x < d; ++x) {
          probs[x] =
              std::max((u.col(x).adjoint() * rho.matrix() * u.col(x))(0, 0).real(), 0.0);
        }
        const int x = rng.categorical(probs);
        data.generic.push_back(Dataset::CopyRecord{u, x});
      }
      return data;
    }
    case MeasurementScheme::Kind::TwoStepAdaptive:
      return sample_two_step(model, theta, scheme, n_copies, rng);
  }
  throw DomainError("sample_outcomes: unknown scheme kind");
}

}  // namespace

MeasurementScheme MeasurementScheme::per_copy_fixed(Povm povm) {
  MeasurementScheme s;
  s.kind = Kind::PerCopyFixed;
  s.description = "fixed_povm";
  s.povm = std::move(povm);
  return s;
}

MeasurementScheme MeasurementScheme::random_basis() {
  MeasurementScheme s;
  s.kind = Kind::RandomBasis;
  s.description = "random_basis";
  return s;
}

Estimator Estimator::mle() {
  Estimator e;
  e.kind = Kind::Mle;
  return e;
}

Estimator Estimator::bayes_mean(vantrees::Prior prior) {
  Estimator e;
  e.kind = Kind::BayesMean;
  e.prior = std::make_shared<vantrees::Prior>(std::move(prior));
  return e;
}

Dataset sample_outcomes(const ParametricModel& model, const RealVector& theta,
                        const MeasurementScheme& scheme, long n_copies,
                        std::uint64_t seed) {
  Rng rng(seed);
  return sample_with_rng(model, theta, scheme, n_copies, rng);
}

double log_likelihood(const ParametricModel& model, const Dataset& data,
                      const RealVector& theta, long max_per_copy) {
  if (!model.domain().contains(theta)) return kNegInf;
  const QuantumState rho = model.state(theta);
  double total = 0.0;
  for (const Dataset::Segment& seg : data.segments) {
    const OutcomeDistribution dist = born_distribution(rho, seg.povm);
    for (std::size_t x = 0; x < seg.counts.size(); ++x) {
      if (seg.counts[x] == 0) continue;
      const double p = dist.probabilities[x];
      if (p <= 0.0) return kNegInf;
      total += seg.counts[x] * std::log(p);
    }
  }
  if (!data.qubit_axes.empty()) {
    const Eigen::Vector3d a = bloch_vector(rho);
    const long limit =
        max_per_copy > 0
            ? std::min<long>(max_per_copy, static_cast<long>(data.qubit_axes.size()))
            : static_cast<long>(data.qubit_axes.size());
    for (long c = 0; c < limit; ++c) {
      const double p = 0.5 * (1.0 + data.qubit_axes[c].dot(a));
      if (p <= 0.0) return kNegInf;
      total += std::log(p);
    }
  }
  if (!data.generic.empty()) {
    const long limit =
        max_per_copy > 0
            ? std::min<long>(max_per_copy, static_cast<long>(data.generic.size()))
            : static_cast<long>(data.generic.size());
    for (long c = 0; c < limit; ++c) {
      const Dataset::CopyRecord& rec = data.generic[c];
      const double p =
          (rec.basis.col(rec.outcome).adjoint() * rho.matrix() * rec.basis.col(rec.outcome))(0, 0)
              .real();
      if (p <= 0.0) return kNegInf;
      total += std::log(p);
    }
  }
  return total;
}

namespace {

// Nelder-Mead ascent of the full log-likelihood.
RealVector nelder_mead_max(const std::function<double(const RealVector&)>& f,
                           const RealVector& start, double step, int max_iter,
                           MleDiagnostics* diag) {
  const int p = static_cast<int>(start.size());
  std::vector<RealVector> xs(p + 1, start);
  std::vector<double> fs(p + 1);
  for (int i = 1; i <= p; ++i) {
    xs[i][i - 1] += step;
    if (!std::isfinite(f(xs[i]))) xs[i][i - 1] -= 2.0 * step;  // step inward
  }
  for (int i = 0; i <= p; ++i) fs[i] = f(xs[i]);

  auto order = [&] {
    for (int i = 1; i <= p; ++i)
      for (int j = i; j > 0 && fs[j] > fs[j - 1]; --j) {
        std::swap(fs[j], fs[j - 1]);
        std::swap(xs[j], xs[j - 1]);
      }
  };
  order();
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    double diameter = 0.0;
    for (int i = 1; i <= p; ++i) diameter = std::max(diameter, (xs[i] - xs[0]).norm());
    if (diameter < 1e-7) break;

    RealVector centroid = RealVector::Zero(p);
    for (int i = 0; i < p; ++i) centroid += xs[i];
    centroid /= p;
    const RealVector worst = xs[p];
    const RealVector refl = centroid + (centroid - worst);
    const double f_refl = f(refl);
    if (f_refl > fs[0]) {
      const RealVector expand = centroid + 2.0 * (centroid - worst);
      const double f_exp = f(expand);
      if (f_exp > f_refl) {
        xs[p] = expand;
        fs[p] = f_exp;
      } else {
        xs[p] = refl;
        fs[p] = f_refl;
      }
    } else if (f_refl > fs[p - 1]) {
      xs[p] = refl;
      fs[p] = f_refl;
    } else {
      const RealVector contract = centroid + 0.5 * (worst - centroid);
      const double f_con = f(contract);
      if (f_con > fs[p]) {
        xs[p] = contract;
        fs[p] = f_con;
      } else {
        for (int i = 1; i <= p; ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = f(xs[i]);
        }
      }
    }
    order();
  }
  if (diag) {
    diag->iterations = iter;
    diag->converged = iter < max_iter;
  }
  return xs[0];
}

}  // namespace

RealVector mle_estimate(const ParametricModel& model, const Dataset& data,
                        MleDiagnostics* diag) {
  if (data.empty() || data.n_copies < 1) {
    throw DegenerateDataError("mle_estimate: empty dataset");
  }
  const int p = model.param_dim();
  RealVector lo, hi;
  model.domain().bounding_box(lo, hi);

  // Initialization candidates: a domain grid scored on a copy subsample,
  // plus a moment start for random-basis qubit data.
  const int per_axis = (p <= 3) ? 21 : 9;
  std::vector<RealVector> candidates;
  {
    std::vector<int> idx(p, 0);
    RealVector pt(p);
    while (true) {
      for (int i = 0; i < p; ++i) {
        pt[i] = lo[i] + (hi[i] - lo[i]) * (idx[i] + 0.5) / per_axis;
      }
      if (model.domain().contains(pt)) candidates.push_back(pt);
      int axis = 0;
      while (axis < p && ++idx[axis] == per_axis) idx[axis++] = 0;
      if (axis == p) break;
    }
  }
  candidates.push_back(domain_center(model.domain()));
  if (!data.qubit_axes.empty() && p <= 3) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const Eigen::Vector3d& v : data.qubit_axes) mean += v;
    mean *= 3.0 / static_cast<double>(data.qubit_axes.size());
    // Interpret the moment vector in the model's own chart when possible.
    RealVector guess = domain_center(model.domain());
    if (model.name() == "full_bloch") {
      guess = mean;
    } else if (model.name() == "equatorial") {
      guess = mean.head(2);
    } else if (model.name() == "bloch_line") {
      guess = mean.tail(1);
    } else if (model.name() == "pure_state_2" && mean.norm() > 1e-12) {
      const Eigen::Vector3d n = mean.normalized();
      // Invert the Bloch map of the chart: n = (2 s t1, 2 s t2, 1 - 2|t|^2).
      const double t_norm_sq = 0.5 * (1.0 - n[2]);
      const double s = std::sqrt(std::max(1.0 - t_norm_sq, 0.0));
      guess.resize(2);
      if (s > 1e-9) {
        guess[0] = n[0] / (2.0 * s);
        guess[1] = n[1] / (2.0 * s);
      } else {
        guess.setZero();
      }
    }
    if (guess.size() == p && model.domain().contains(guess)) {
      candidates.push_back(guess);
    }
  }

  const long subsample = 512;
  double best = kNegInf;
  RealVector start = candidates.front();
  int ties = 0;
  for (const RealVector& c : candidates) {
    const double v = log_likelihood(model, data, c, subsample);
    if (!std::isfinite(v)) continue;
    const double margin = std::isfinite(best) ? 1e-12 * (1.0 + std::abs(best)) : 0.0;
    if (v > best + margin) {
      best = v;
      start = c;
      ties = 1;
    } else if (std::abs(v - best) <= margin) {
      ++ties;
    }
  }
  if (!std::isfinite(best)) {
    throw DegenerateDataError("mle_estimate: zero likelihood on the whole grid");
  }
  if (diag) {
    diag->grid_start = start;
    diag->flat = ties > 1;
  }

  auto objective = [&](const RealVector& theta) {
    return log_likelihood(model, data, theta, 0);
  };
  double step = 0.0;
  for (int i = 0; i < p; ++i) step = std::max(step, 0.05 * (hi[i] - lo[i]));
  return nelder_mead_max(objective, start, step, 200 * p + 200, diag);
}

namespace {

// Posterior mean and covariance over one quadrature rule; false when the
// posterior carries no mass on the rule's nodes.
bool posterior_moments(const ParametricModel& model, const Dataset& data,
                       const vantrees::Prior& prior,
                       const vantrees::QuadratureRule& rule, RealVector& mean_out,
                       RealMatrix& cov_out) {
  const int p = model.param_dim();
  const std::size_t n = rule.nodes.size();
  std::vector<double> logl(n, kNegInf);
  double max_logl = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (!prior.support.contains(rule.nodes[i])) continue;
    if (prior.density(rule.nodes[i]) <= 0.0) continue;
    logl[i] = log_likelihood(model, data, rule.nodes[i], 0);
    max_logl = std::max(max_logl, logl[i]);
  }
  if (!std::isfinite(max_logl)) return false;
  double denom = 0.0;
  RealVector numer = RealVector::Zero(p);
  RealMatrix second = RealMatrix::Zero(p, p);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(logl[i])) continue;
    const double w =
        rule.weights[i] * prior.density(rule.nodes[i]) * std::exp(logl[i] - max_logl);
    denom += w;
    numer += w * rule.nodes[i];
    second += w * rule.nodes[i] * rule.nodes[i].transpose();
  }
  if (denom <= 0.0) return false;
  mean_out = numer / denom;
  cov_out = second / denom - mean_out * mean_out.transpose();
  return true;
}

}  // namespace

RealVector bayes_mean_estimate(const ParametricModel& model, const Dataset& data,
                               const vantrees::Prior& prior) {
  if (data.empty()) throw DegenerateDataError("bayes_mean_estimate: empty dataset");
  const int p = model.param_dim();

  // Pass 1: a rule over the whole support locates the posterior mass.
  const int n_global = 8 << (p == 1 ? 2 : 1);
  const vantrees::QuadratureRule global =
      vantrees::support_rule(prior.support, p == 1 ? 2 : 1);
  RealVector mean;
  RealMatrix cov;
  if (!posterior_moments(model, data, prior, global, mean, cov)) {
    throw DegenerateDataError("bayes_mean_estimate: posterior mass vanishes");
  }

  // Pass 2: for large datasets the posterior peak is far narrower than the
  // global node spacing, so integrate again on a window around the located
  // mass.  The window is wide enough (6 posterior sds, floored at three
  // global spacings) that the truncated tails are negligible.
  RealVector lo, hi;
  prior.support.bounding_box(lo, hi);
  RealVector wlo(p), whi(p);
  bool window_ok = true;
  for (int i = 0; i < p; ++i) {
    const double sd = std::sqrt(std::max(cov(i, i), 0.0));
    const double spacing = (hi[i] - lo[i]) * std::numbers::pi / (2.0 * n_global);
    const double half = std::max(6.0 * sd, 3.0 * spacing);
    if (!std::isfinite(half) || half <= 0.0) {
      window_ok = false;
      break;
    }
    wlo[i] = std::max(lo[i], mean[i] - half);
    whi[i] = std::min(hi[i], mean[i] + half);
    if (!(whi[i] > wlo[i])) {
      window_ok = false;
      break;
    }
  }
  if (window_ok) {
    const int n_axis = p == 1 ? 48 : (p == 2 ? 16 : 8);
    const vantrees::QuadratureRule local = vantrees::box_rule(wlo, whi, n_axis);
    RealVector rmean;
    RealMatrix rcov;
    if (posterior_moments(model, data, prior, local, rmean, rcov)) mean = rmean;
  }
  return mean;
}

std::function<fisher::InfoMatrix(const RealVector&)> scheme_info_field(
    const ParametricModel& model, const MeasurementScheme& scheme) {
  switch (scheme.kind) {
    case MeasurementScheme::Kind::PerCopyFixed: {
      const Povm povm = *scheme.povm;
      ParametricModel m = model;
      return [m, povm](const RealVector& theta) {
        return fisher::fisher_info(m, theta, povm);
      };
    }
    case MeasurementScheme::Kind::RandomBasis: {
      ParametricModel m = model;
      return [m](const RealVector& theta) {
        const int d = m.state(theta).dim();
        Rng rng(424242);  // fixed basis panel, deterministic across calls
        RealMatrix sum = RealMatrix::Zero(m.param_dim(), m.param_dim());
        const int n_bases = 256;
        for (int b = 0; b < n_bases; ++b) {
          const Povm povm = models::rotated_basis_povm(rng.haar_unitary(d));
          sum += fisher::fisher_info(m, theta, povm).matrix;
        }
        return fisher::InfoMatrix{sum / n_bases, fisher::InfoKind::AveragePerCopy};
      };
    }
    case MeasurementScheme::Kind::TwoStepAdaptive: {
      if (!scheme.tuner) {
        throw DomainError("scheme_info_field: two-step scheme has no tuning rule");
      }
      ParametricModel m = model;
      auto tuner = scheme.tuner;
      return [m, tuner](const RealVector& theta) {
        return fisher::fisher_info(m, theta, tuner(m, theta));
      };
    }
  }
  throw DomainError("scheme_info_field: unknown scheme kind");
}

RiskReport risk_experiment(const ParametricModel& model, const ThetaOrPrior& target,
                           const MeasurementScheme& scheme, const Estimator& estimator,
                           const vantrees::LossSpec& loss, long n_copies, int reps,
                           std::uint64_t seed) {
  if (reps < 100) {
    throw DomainError("risk_experiment: need reps >= 100 for standard errors");
  }
  if (n_copies < 1) throw DomainError("risk_experiment: need N >= 1");
  const bool bayesian = std::holds_alternative<vantrees::Prior>(target);

  auto loss_value = [&loss](const RealVector& est, const RealVector& truth) {
    const RealVector diff = loss.psi(est) - loss.psi(truth);
    return diff.dot(loss.g_tilde(truth) * diff);
  };

  auto run_rep = [&](int rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    RealVector theta;
    if (bayesian) {
      theta = vantrees::sample_prior(std::get<vantrees::Prior>(target), rng);
    } else {
      theta = std::get<RealVector>(target);
    }
    const Dataset data = sample_with_rng(model, theta, scheme, n_copies, rng);
    RealVector est;
    if (estimator.kind == Estimator::Kind::Mle) {
      est = mle_estimate(model, data);
    } else {
      if (!estimator.prior) {
        throw DomainError("risk_experiment: Bayes estimator needs a prior");
      }
      est = bayes_mean_estimate(model, data, *estimator.prior);
    }
    return loss_value(est, theta);
  };

  std::vector<double> losses(reps, 0.0);
  const int threads = std::min(env_thread_cap(), reps);
  if (threads <= 1) {
    for (int r = 0; r < reps; ++r) losses[r] = run_rep(r);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_lock;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int r = t; r < reps; r += threads) losses[r] = run_rep(r);
        } catch (...) {
          std::scoped_lock g(error_lock);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  // Fixed-order aggregation keeps reports bit-identical for a given seed.
  double sum = 0.0, comp = 0.0;
  for (double l : losses) {
    const double y = l - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  const double mean_loss = sum / reps;
  double sq = 0.0;
  const double n = static_cast<double>(n_copies);
  for (double l : losses) {
    const double dev = n * l - n * mean_loss;
    sq += dev * dev;
  }

  RiskReport report;
  report.n_copies = n_copies;
  report.reps = reps;
  report.mean_loss = mean_loss;
  report.empirical_risk = n * mean_loss;
  report.std_error = (reps > 1) ? std::sqrt(sq / (reps - 1)) / std::sqrt(reps) : 0.0;
  report.loss_kind = (loss.name == "fidelity") ? "fidelity" : "quadratic";
  report.scheme = scheme.description;
  report.estimator = (estimator.kind == Estimator::Kind::Mle) ? "mle" : "bayes_mean";

  if (bayesian) {
    const vantrees::Prior& prior = std::get<vantrees::Prior>(target);
    const vantrees::CField c_field = vantrees::optimal_c_field(model, loss);
    report.bound = vantrees::van_trees_rhs(model, prior, loss, c_field, n_copies,
                                           scheme_info_field(model, scheme));
    report.bound_kind = "van_trees";
  } else {
    const RealVector& theta = std::get<RealVector>(target);
    report.bound =
        holevo::holevo_bound(model, theta, holevo::WeightMatrix(loss.g0(theta))).value;
    report.bound_kind = "holevo";
  }
  report.bound_violation =
      report.empirical_risk < report.bound - 3.0 * report.std_error;
  return report;
}

CovariantInfoReport covariant_info_check(int d, int n_bases, std::uint64_t seed) {
  if (d < 2) throw DimensionError("covariant_info_check: need d >= 2");
  if (n_bases < 1) throw DomainError("covariant_info_check: need n_bases >= 1");
  const ParametricModel model = models::pure_state(d);
  const int p = model.param_dim();
  const RealVector theta0 = RealVector::Zero(p);
  const RealMatrix h = fisher::helstrom_info(model, theta0).matrix;
  const Eigen::LDLT<RealMatrix> h_fact(h);

  Rng rng(seed);
  RealMatrix sum = RealMatrix::Zero(p, p);
  double max_single = 0.0;
  for (int b = 0; b < n_bases; ++b) {
    const Povm povm = models::rotated_basis_povm(rng.haar_unitary(d));
    const RealMatrix info = fisher::fisher_info(model, theta0, povm).matrix;
    sum += info;
    max_single = std::max(max_single, h_fact.solve(info).trace());
  }
  CovariantInfoReport report;
  report.n_bases = n_bases;
  report.helstrom = h;
  report.average_info = sum / n_bases;
  report.ratio = report.average_info * h_fact.solve(RealMatrix::Identity(p, p));
  report.trace_h_inv_info = h_fact.solve(report.average_info).trace();
  report.max_single_trace = max_single;
  return report;
}

MeasurementScheme two_step_scheme(const ParametricModel& model,
                                  const vantrees::LossSpec& loss, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw DomainError("two_step_scheme: fraction must be in (0, 1)");
  }
  if (loss.p != model.param_dim()) {
    throw DimensionError("two_step_scheme: loss/model dimension mismatch");
  }
  MeasurementScheme scheme;
  scheme.kind = MeasurementScheme::Kind::TwoStepAdaptive;
  scheme.fraction = fraction;
  scheme.description = "two_step";
  vantrees::LossSpec loss_copy = loss;
  scheme.tuner = [loss_copy](const ParametricModel& m, const RealVector& pilot) {
    const holevo::HolevoSolution sol = holevo::holevo_bound(
        m, pilot, holevo::WeightMatrix(loss_copy.g0(pilot)));
    const RealMatrix k0 = sol.dual_k;
    const int d = m.state(pilot).dim();
    auto score = [&](const Povm& povm) {
      return (k0 * fisher::fisher_info(m, pilot, povm).matrix).trace();
    };
    if (d == 2) {
      // Coordinate axes plus a Fibonacci sphere sweep.
      std::vector<Eigen::Vector3d> axes = {
          {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      const int n_grid = 120;
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < n_grid; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n_grid;
        const double r = std::sqrt(std::max(1.0 - z * z, 0.0));
        const double a = golden * i;
        axes.emplace_back(r * std::cos(a), r * std::sin(a), z);
      }
      double best = kNegInf;
      Povm best_povm = models::spin_axis_povm(axes.front());
      for (const Eigen::Vector3d& axis : axes) {
        Povm povm = models::spin_axis_povm(axis.normalized());
        const double s = score(povm);
        if (s > best) {
          best = s;
          best_povm = std::move(povm);
        }
      }
      return best_povm;
    }
    Rng basis_rng(9001);  // fixed candidate panel
    double best = kNegInf;
    Povm best_povm = models::basis_povm(d);
    for (int i = 0; i < 50; ++i) {
      Povm povm = models::rotated_basis_povm(basis_rng.haar_unitary(d));
      const double s = score(povm);
      if (s > best) {
        best = s;
        best_povm = std::move(povm);
      }
    }
    if (score(models::basis_povm(d)) > best) best_povm = models::basis_povm(d);
    return best_povm;
  };
  return scheme;
}

}  // namespace qcrb::simulate
