#include "qcrb/vantrees.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "qcrb/linalg.hpp"

namespace qcrb::vantrees {
namespace {

constexpr double kProductFdStep = 1e-4;  // step for the (C pi)' derivative

std::string format_theta(const RealVector& theta) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta[i];
  os << ")";
  return os.str();
}

// Kahan-compensated accumulator for order-insensitive quadrature sums.
struct Accumulator {
  RealVector sum, comp;
  explicit Accumulator(int n) : sum(RealVector::Zero(n)), comp(RealVector::Zero(n)) {}
  void add(const RealVector& x) {
    for (int i = 0; i < sum.size(); ++i) {
      const double y = x[i] - comp[i];
      const double t = sum[i] + y;
      comp[i] = (t - sum[i]) - y;
      sum[i] = t;
    }
  }
};

// Memoized matrix field keyed on the exact parameter vector.
struct MatrixFieldCache {
  std::map<std::vector<double>, RealMatrix> values;
  std::mutex lock;

  RealMatrix get(const RealVector& theta,
                 const std::function<RealMatrix(const RealVector&)>& compute) {
    std::vector<double> key(theta.data(), theta.data() + theta.size());
    {
      std::scoped_lock g(lock);
      auto it = values.find(key);
      if (it != values.end()) return it->second;
    }
    RealMatrix value = compute(theta);
    std::scoped_lock g(lock);
    return values.emplace(std::move(key), std::move(value)).first->second;
  }
};

double ball_bump_normalization(int dim, double radius) {
  // Integral of (1 - (r/R)^2)^2 over the ball: surface measure of S^{d-1}
  // times R^d * int_0^1 (1-u^2)^2 u^{d-1} du.
  const double surface =
      2.0 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0);
  const double radial = 1.0 / dim - 2.0 / (dim + 2) + 1.0 / (dim + 4);
  return surface * std::pow(radius, dim) * radial;
}

double ball_volume(int dim, double radius) {
  return std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0) *
         std::pow(radius, dim);
}

}  // namespace

RealMatrix LossSpec::g0(const RealVector& theta) const {
  const RealMatrix jac = psi_jacobian(theta);
  const RealMatrix gt = g_tilde(theta);
  RealMatrix g = jac.transpose() * gt * jac;
  return 0.5 * (g + g.transpose().eval());
}

LossSpec identity_loss(int p) {
  LossSpec loss;
  loss.p = p;
  loss.q = p;
  loss.psi = [](const RealVector& theta) { return theta; };
  loss.psi_jacobian = [p](const RealVector&) { return RealMatrix::Identity(p, p); };
  loss.g_tilde = [p](const RealVector&) { return RealMatrix::Identity(p, p); };
  loss.name = "identity";
  return loss;
}

Prior cos2_box_prior(const RealVector& lo, const RealVector& hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw DimensionError("cos2_box_prior: bounds must have equal nonzero size");
  }
  for (int i = 0; i < lo.size(); ++i)
    if (!(hi[i] > lo[i])) throw DomainError("cos2_box_prior: need hi > lo");
  const int p = static_cast<int>(lo.size());
  RealVector lo_c = lo, hi_c = hi;
  auto factor = [lo_c, hi_c](const RealVector& theta, int i) {
    const double len = hi_c[i] - lo_c[i];
    const double s = std::sin(std::numbers::pi * (theta[i] - lo_c[i]) / len);
    return 2.0 / len * s * s;
  };
  Prior prior;
  prior.support = Domain::box(lo_c, hi_c);
  prior.density = [factor, p, lo_c, hi_c](const RealVector& theta) {
    double v = 1.0;
    for (int i = 0; i < p; ++i) {
      if (theta[i] <= lo_c[i] || theta[i] >= hi_c[i]) return 0.0;
      v *= factor(theta, i);
    }
    return v;
  };
  prior.gradient = [factor, p, lo_c, hi_c](const RealVector& theta) -> RealVector {
    RealVector g = RealVector::Zero(p);
    for (int i = 0; i < p; ++i) {
      if (theta[i] <= lo_c[i] || theta[i] >= hi_c[i]) return RealVector::Zero(p);
    }
    for (int i = 0; i < p; ++i) {
      const double len = hi_c[i] - lo_c[i];
      const double d =
          2.0 * std::numbers::pi / (len * len) *
          std::sin(2.0 * std::numbers::pi * (theta[i] - lo_c[i]) / len);
      double rest = 1.0;
      for (int j = 0; j < p; ++j)
        if (j != i) rest *= factor(theta, j);
      g[i] = d * rest;
    }
    return g;
  };
  double cap = 1.0;
  for (int i = 0; i < p; ++i) cap *= 2.0 / (hi[i] - lo[i]);
  prior.density_cap = cap;
  prior.name = "cos2_box";
  return prior;
}

Prior ball_bump_prior(int dim, double radius) {
  if (dim < 1 || radius <= 0.0) throw DomainError("ball_bump_prior: bad arguments");
  const double norm = 1.0 / ball_bump_normalization(dim, radius);
  Prior prior;
  prior.support = Domain::ball(dim, radius);
  prior.density = [norm, radius](const RealVector& theta) {
    const double u = theta.squaredNorm() / (radius * radius);
    if (u >= 1.0) return 0.0;
    const double b = 1.0 - u;
    return norm * b * b;
  };
  prior.gradient = [norm, radius, dim](const RealVector& theta) {
    const double r2 = radius * radius;
    const double u = theta.squaredNorm() / r2;
    if (u >= 1.0) return RealVector(RealVector::Zero(dim));
    return RealVector(-4.0 * norm * (1.0 - u) / r2 * theta);
  };
  prior.density_cap = norm;
  prior.name = "ball_bump";
  return prior;
}

Prior uniform_ball_prior(int dim, double radius) {
  if (dim < 1 || radius <= 0.0) throw DomainError("uniform_ball_prior: bad arguments");
  const double density = 1.0 / ball_volume(dim, radius);
  Prior prior;
  prior.support = Domain::ball(dim, radius);
  prior.density = [density, radius](const RealVector& theta) {
    return theta.norm() < radius ? density : 0.0;
  };
  prior.gradient = [dim](const RealVector&) { return RealVector(RealVector::Zero(dim)); };
  prior.density_cap = density;
  prior.name = "uniform_ball";
  return prior;
}

RealVector prior_gradient(const Prior& prior, const RealVector& theta) {
  if (prior.gradient) return prior.gradient(theta);
  const int p = static_cast<int>(theta.size());
  RealVector g(p);
  const double h = 1e-6;
  for (int i = 0; i < p; ++i) {
    RealVector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    g[i] = (prior.density(tp) - prior.density(tm)) / (2.0 * h);
  }
  return g;
}

RealVector sample_prior(const Prior& prior, Rng& rng) {
  RealVector lo, hi;
  prior.support.bounding_box(lo, hi);
  const int p = static_cast<int>(lo.size());
  double cap = prior.density_cap;
  if (cap <= 0.0) {
    // Estimate a cap from a coarse grid scan, then inflate.
    const QuadratureRule rule = support_rule(prior.support, 0);
    for (const RealVector& node : rule.nodes) cap = std::max(cap, prior.density(node));
    cap *= 1.5;
    if (cap <= 0.0) throw PriorError("sample_prior: density appears to vanish");
  }
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    RealVector theta(p);
    for (int i = 0; i < p; ++i) theta[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    const double d = prior.density(theta);
    if (d > cap * (1.0 + 1e-9)) {
      throw PriorError("sample_prior: density exceeds its declared cap");
    }
    if (rng.uniform() * cap < d) return theta;
  }
  throw PriorError("sample_prior: rejection sampling failed to accept");
}

// ---- quadrature -----------------------------------------------------------

void gauss_legendre(int n, RealVector& nodes, RealVector& weights) {
  if (n < 1) throw DomainError("gauss_legendre: need n >= 1");
  nodes.resize(n);
  weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

QuadratureRule box_rule(const RealVector& lo, const RealVector& hi, int n_per_axis) {
  const int p = static_cast<int>(lo.size());
  RealVector x, w;
  gauss_legendre(n_per_axis, x, w);
  QuadratureRule rule;
  std::vector<int> idx(p, 0);
  RealVector node(p);
  while (true) {
    double weight = 1.0;
    for (int i = 0; i < p; ++i) {
      const double half = 0.5 * (hi[i] - lo[i]);
      node[i] = lo[i] + half * (x[idx[i]] + 1.0);
      weight *= half * w[idx[i]];
    }
    rule.nodes.push_back(node);
    rule.weights.push_back(weight);
    int axis = 0;
    while (axis < p && ++idx[axis] == n_per_axis) idx[axis++] = 0;
    if (axis == p) break;
  }
  return rule;
}

QuadratureRule ball_rule(int dim, double radius, int n_radial) {
  QuadratureRule rule;
  RealVector xr, wr;
  gauss_legendre(n_radial, xr, wr);
  std::vector<double> r(n_radial), rw(n_radial);
  for (int i = 0; i < n_radial; ++i) {
    r[i] = 0.5 * radius * (xr[i] + 1.0);
    rw[i] = 0.5 * radius * wr[i] * std::pow(r[i], dim - 1);
  }
  if (dim == 1) {
    // Two half-lines.
    for (int i = 0; i < n_radial; ++i) {
      for (double sign : {-1.0, 1.0}) {
        RealVector node(1);
        node[0] = sign * r[i];
        rule.nodes.push_back(node);
        rule.weights.push_back(rw[i]);
      }
    }
    return rule;
  }
  if (dim == 2) {
    const int m = 4 * n_radial;
    for (int i = 0; i < n_radial; ++i)
      for (int k = 0; k < m; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / m;
        RealVector node(2);
        node[0] = r[i] * std::cos(phi);
        node[1] = r[i] * std::sin(phi);
        rule.nodes.push_back(node);
        rule.weights.push_back(rw[i] * 2.0 * std::numbers::pi / m);
      }
    return rule;
  }
  if (dim == 3) {
    // Gauss-Legendre in cos(polar) -- exact for zonal polynomials, unlike a
    // half-period trapezoid in the angle itself -- and uniform azimuth over
    // the full period, which is spectrally accurate.
    const int mu = 2 * n_radial;
    const int mphi = 2 * n_radial;
    RealVector xu, wu;
    gauss_legendre(mu, xu, wu);
    for (int i = 0; i < n_radial; ++i)
      for (int j = 0; j < mu; ++j) {
        const double cospol = xu[j];
        const double sinpol = std::sqrt(std::max(0.0, 1.0 - cospol * cospol));
        for (int k = 0; k < mphi; ++k) {
          const double phi = 2.0 * std::numbers::pi * k / mphi;
          RealVector node(3);
          node[0] = r[i] * sinpol * std::cos(phi);
          node[1] = r[i] * sinpol * std::sin(phi);
          node[2] = r[i] * cospol;
          rule.nodes.push_back(node);
          rule.weights.push_back(rw[i] * wu[j] * 2.0 * std::numbers::pi / mphi);
        }
      }
    return rule;
  }
  throw DimensionError("ball_rule: only dimensions 1-3 are supported");
}

QuadratureRule support_rule(const Domain& support, int level) {
  const int n = 8 << level;
  switch (support.kind) {
    case Domain::Kind::Box:
      return box_rule(support.lo, support.hi, n);
    case Domain::Kind::Ball:
      return ball_rule(support.dim, support.radius, n);
    case Domain::Kind::All:
      throw DomainError("support_rule: unbounded supports cannot be integrated");
  }
  throw DomainError("support_rule: unknown domain kind");
}

QuadratureResult integrate_adaptive(
    const Domain& support, int out_dim,
    const std::function<RealVector(const RealVector&)>& f,
    const QuadratureOptions& opts) {
  QuadratureResult res;
  RealVector prev;
  for (int level = 0; level <= opts.max_level; ++level) {
    const QuadratureRule rule = support_rule(support, level);
    Accumulator acc(out_dim);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      RealVector v = f(rule.nodes[i]);
      if (v.size() != out_dim) {
        throw DimensionError("integrate_adaptive: integrand dimension mismatch");
      }
      acc.add(rule.weights[i] * v);
    }
    res.value = acc.sum;
    res.nodes += static_cast<long>(rule.nodes.size());
    res.level = level;
    if (res.value.cwiseAbs().maxCoeff() > opts.divergence_cap) {
      throw DivergenceError("integrate_adaptive: integral exceeds divergence cap");
    }
    if (level > 0) {
      bool ok = true;
      for (int i = 0; i < out_dim; ++i) {
        const double scale = std::max(std::abs(res.value[i]), 1e-9);
        if (std::abs(res.value[i] - prev[i]) > opts.rel_tol * scale) ok = false;
      }
      if (ok) {
        res.converged = true;
        return res;
      }
    }
    prev = res.value;
  }
  throw ConvergenceError("integrate_adaptive: refinement did not stabilize");
}

// ---- prior / loss checks --------------------------------------------------

namespace {

// Probe points infinitesimally inside the boundary (a limit-from-inside
// stand-in, so densities defined as zero exactly on the edge still register).
std::vector<RealVector> boundary_samples(const Domain& support) {
  constexpr double kInset = 1.0 - 1e-6;
  std::vector<RealVector> pts;
  if (support.kind == Domain::Kind::Ball) {
    const int p = support.dim;
    const double r = support.radius * kInset;
    if (p == 1) {
      for (double s : {-1.0, 1.0}) {
        RealVector v(1);
        v[0] = s * r;
        pts.push_back(v);
      }
    } else if (p == 2) {
      for (int k = 0; k < 64; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 64;
        RealVector v(2);
        v[0] = r * std::cos(a);
        v[1] = r * std::sin(a);
        pts.push_back(v);
      }
    } else {
      Rng rng(12345);  // fixed probe set
      for (int k = 0; k < 256; ++k) {
        RealVector v = rng.normal_vector(p);
        const double n = v.norm();
        if (n > 0) pts.push_back(r / n * v);
      }
    }
    return pts;
  }
  if (support.kind == Domain::Kind::Box) {
    const int p = static_cast<int>(support.lo.size());
    const RealVector center = 0.5 * (support.lo + support.hi);
    const int grid = 5;
    // Every face, gridded.
    for (int face_axis = 0; face_axis < p; ++face_axis) {
      for (double side : {0.0, 1.0}) {
        std::vector<int> idx(p, 0);
        while (true) {
          RealVector v(p);
          for (int i = 0; i < p; ++i) {
            if (i == face_axis) {
              v[i] = support.lo[i] + side * (support.hi[i] - support.lo[i]);
            } else {
              v[i] = support.lo[i] +
                     (support.hi[i] - support.lo[i]) * idx[i] / (grid - 1.0);
            }
          }
          pts.push_back(center + kInset * (v - center));
          int axis = 0;
          while (axis < p) {
            if (axis == face_axis) {
              ++axis;
              continue;
            }
            if (++idx[axis] < grid) break;
            idx[axis++] = 0;
          }
          if (axis >= p) break;
        }
      }
    }
    return pts;
  }
  throw DomainError("boundary_samples: unbounded support");
}

}  // namespace

PriorCheckReport check_prior(const Prior& prior) {
  PriorCheckReport report;
  const auto res = integrate_adaptive(
      prior.support, 1,
      [&prior](const RealVector& theta) {
        RealVector v(1);
        v[0] = prior.density(theta);
        if (v[0] < 0.0) throw PriorError("check_prior: negative density");
        return v;
      });
  report.normalization = res.value[0];
  for (const RealVector& pt : boundary_samples(prior.support)) {
    report.boundary_max = std::max(report.boundary_max, prior.density(pt));
  }
  report.normalized = std::abs(report.normalization - 1.0) <= 1e-4;
  report.vanishes = report.boundary_max < 1e-8;
  report.ok = report.normalized && report.vanishes;
  return report;
}

LossCheckReport check_loss(const LossSpec& loss, const RealVector& theta) {
  LossCheckReport report;
  const RealMatrix jac = loss.psi_jacobian(theta);
  const double h = 1e-5;
  RealMatrix fd(loss.q, loss.p);
  for (int j = 0; j < loss.p; ++j) {
    RealVector tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    fd.col(j) = (loss.psi(tp) - loss.psi(tm)) / (2.0 * h);
  }
  report.jacobian_defect = (fd - jac).cwiseAbs().maxCoeff();
  report.g0_min_eigenvalue =
      Eigen::SelfAdjointEigenSolver<RealMatrix>(loss.g0(theta)).eigenvalues().minCoeff();
  report.ok = report.jacobian_defect <= 1e-4 && report.g0_min_eigenvalue > 0.0;
  return report;
}

// ---- bound evaluation -----------------------------------------------------

CField optimal_c_field(const ParametricModel& model, const LossSpec& loss,
                       const SolverOptions& options) {
  if (loss.p != model.param_dim()) {
    throw DimensionError("optimal_c_field: loss/model parameter dimension mismatch");
  }
  auto cache = std::make_shared<MatrixFieldCache>();
  auto compute = [model, loss, options](const RealVector& theta) -> RealMatrix {
    try {
      const holevo::HolevoSolution sol =
          holevo::holevo_bound(model, theta, holevo::WeightMatrix(loss.g0(theta)),
                               options);
      return loss.g_tilde(theta) * loss.psi_jacobian(theta) * sol.v_opt;
    } catch (const Error& e) {
      throw ConvergenceError(std::string("optimal_c_field: solver failed at theta = ") +
                             format_theta(theta) + ": " + e.what());
    }
  };
  CField field;
  field.c = [cache, compute](const RealVector& theta) {
    return cache->get(theta, compute);
  };
  return field;
}

std::function<fisher::InfoMatrix(const RealVector&)> dual_cap_info_field(
    const ParametricModel& model, const LossSpec& loss, const SolverOptions& options) {
  auto cache = std::make_shared<MatrixFieldCache>();
  auto compute = [model, loss, options](const RealVector& theta) -> RealMatrix {
    const holevo::HolevoSolution sol = holevo::holevo_bound(
        model, theta, holevo::WeightMatrix(loss.g0(theta)), options);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(sol.v_opt);
    if (es.eigenvalues().minCoeff() <= 1e-12) {
      throw SingularError("dual_cap_info_field: optimal covariance is singular at " +
                          format_theta(theta));
    }
    return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
  };
  return [cache, compute](const RealVector& theta) {
    return fisher::InfoMatrix{cache->get(theta, compute),
                              fisher::InfoKind::AveragePerCopy};
  };
}

namespace {

// Product field C(theta) pi(theta), zero outside the support.
RealMatrix c_pi_product(const Prior& prior, const CField& c_field, int q, int p,
                        const RealVector& theta) {
  if (!prior.support.contains(theta)) return RealMatrix::Zero(q, p);
  const double d = prior.density(theta);
  if (d <= 0.0) return RealMatrix::Zero(q, p);
  return d * c_field.c(theta);
}

}  // namespace

double j_pi(const Prior& prior, const CField& c_field, const LossSpec& loss) {
  const int p = loss.p, q = loss.q;
  auto integrand = [&](const RealVector& theta) {
    RealVector out(1);
    const double d = prior.density(theta);
    if (d <= 0.0) {
      out[0] = 0.0;
      return out;
    }
    // Divergence-style derivative: row i of (C pi)' is sum_j d/dtheta_j (C pi)_ij.
    RealVector div = RealVector::Zero(q);
    for (int j = 0; j < p; ++j) {
      RealVector tp = theta, tm = theta;
      tp[j] += kProductFdStep;
      tm[j] -= kProductFdStep;
      const RealMatrix delta = c_pi_product(prior, c_field, q, p, tp) -
                               c_pi_product(prior, c_field, q, p, tm);
      div += delta.col(j) / (2.0 * kProductFdStep);
    }
    const RealMatrix gt = loss.g_tilde(theta);
    const RealVector y = gt.ldlt().solve(div);
    // E_pi[ x / pi^2 ] has integrand x / pi against Lebesgue measure.
    out[0] = div.dot(y) / d;
    if (!std::isfinite(out[0])) {
      throw DivergenceError("j_pi: non-finite integrand at " + format_theta(theta));
    }
    return out;
  };
  const auto res = integrate_adaptive(prior.support, 1, integrand);
  if (res.value[0] < 0.0) {
    throw NumericalError("j_pi: negative value from quadrature");
  }
  return res.value[0];
}

VanTreesBreakdown van_trees_breakdown(
    const ParametricModel& model, const Prior& prior, const LossSpec& loss,
    const CField& c_field, long n_copies,
    const std::function<fisher::InfoMatrix(const RealVector&)>& info_field) {
  if (n_copies < 1) throw DomainError("van_trees_breakdown: need N >= 1");
  if (loss.p != model.param_dim()) {
    throw DimensionError("van_trees_breakdown: loss/model dimension mismatch");
  }
  const int p = loss.p;
  auto integrand = [&](const RealVector& theta) {
    RealVector out = RealVector::Zero(2);
    const double d = prior.density(theta);
    if (d <= 0.0) return out;
    const RealMatrix c = c_field.c(theta);
    const RealMatrix jac = loss.psi_jacobian(theta);
    const fisher::InfoMatrix info = info_field(theta);
    if (info.matrix.rows() != p || info.matrix.cols() != p) {
      throw DimensionError("van_trees_breakdown: info matrix has wrong shape");
    }
    const RealMatrix gt = loss.g_tilde(theta);
    out[0] = d * (c * jac.transpose()).trace();
    out[1] = d * (gt.ldlt().solve(c * info.matrix * c.transpose())).trace();
    return out;
  };
  const auto res = integrate_adaptive(prior.support, 2, integrand);
  VanTreesBreakdown breakdown;
  breakdown.numerator_mean = res.value[0];
  breakdown.info_mean = res.value[1];
  breakdown.j_value = j_pi(prior, c_field, loss);
  breakdown.nodes = res.nodes;
  const double denom =
      breakdown.info_mean + breakdown.j_value / static_cast<double>(n_copies);
  if (denom <= 0.0) {
    if (breakdown.numerator_mean == 0.0) {
      breakdown.rhs = 0.0;  // vacuous bound
      return breakdown;
    }
    throw DegenerateBoundError("van_trees_breakdown: nonpositive denominator");
  }
  breakdown.rhs = breakdown.numerator_mean * breakdown.numerator_mean / denom;
  return breakdown;
}

double van_trees_rhs(
    const ParametricModel& model, const Prior& prior, const LossSpec& loss,
    const CField& c_field, long n_copies,
    const std::function<fisher::InfoMatrix(const RealVector&)>& info_field) {
  return van_trees_breakdown(model, prior, loss, c_field, n_copies, info_field).rhs;
}

double asymptotic_bound(const ParametricModel& model, const Prior& prior,
                        const LossSpec& loss, const SolverOptions& options) {
  if (loss.p != model.param_dim()) {
    throw DimensionError("asymptotic_bound: loss/model dimension mismatch");
  }
  auto integrand = [&](const RealVector& theta) {
    RealVector out(1);
    const double d = prior.density(theta);
    if (d <= 0.0) {
      out[0] = 0.0;
      return out;
    }
    const holevo::HolevoSolution sol = holevo::holevo_bound(
        model, theta, holevo::WeightMatrix(loss.g0(theta)), options);
    out[0] = d * sol.value;
    return out;
  };
  return integrate_adaptive(prior.support, 1, integrand).value[0];
}

namespace {

// C^1 taper: 1 below s0, cos^2 roll-off, 0 above s1.
double taper(double s, double s0, double s1) {
  if (s <= s0) return 1.0;
  if (s >= s1) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * (s - s0) / (s1 - s0));
  return c * c;
}

// Fraction of the way to the boundary (1 = on the boundary).
double boundary_fraction(const Domain& support, const RealVector& theta) {
  if (support.kind == Domain::Kind::Ball) return theta.norm() / support.radius;
  double s = 0.0;
  for (int i = 0; i < support.lo.size(); ++i) {
    const double c = 0.5 * (support.lo[i] + support.hi[i]);
    const double h = 0.5 * (support.hi[i] - support.lo[i]);
    s = std::max(s, std::abs(theta[i] - c) / h);
  }
  return s;
}

}  // namespace

Prior prior_squeeze(const Prior& prior, double eps, double delta, SqueezeInfo* info) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("prior_squeeze: eps must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("prior_squeeze: delta must be in (0,1)");
  }
  if (prior.support.kind == Domain::Kind::All) {
    throw DomainError("prior_squeeze: support must be compact");
  }
  const double s1 = 1.0 - delta;

  auto mass_with_taper = [&](double s0) {
    auto f = [&](const RealVector& theta) {
      RealVector v(1);
      v[0] = prior.density(theta) *
             taper(boundary_fraction(prior.support, theta), s0, s1);
      return v;
    };
    return integrate_adaptive(prior.support, 1, f).value[0];
  };

  // Prefer the widest (smoothest) taper that keeps the density below
  // (1+eps) * pi; fall back to the largest surviving mass otherwise.
  const double widths[] = {2.0 * delta, 1.5 * delta, 1.2 * delta, 1.0 * delta,
                           0.5 * delta};
  double best_s0 = s1 - widths[0];
  double best_mass = -1.0;
  for (double width : widths) {
    const double s0 = std::max(s1 - width, 0.0);
    const double mass = mass_with_taper(s0);
    if (mass <= 1e-12) continue;
    if (1.0 / mass <= 1.0 + eps) {
      best_s0 = s0;
      best_mass = mass;
      break;
    }
    if (mass > best_mass) {
      best_s0 = s0;
      best_mass = mass;
    }
  }
  if (best_mass <= 1e-12) {
    throw PriorError("prior_squeeze: surviving mass too small to normalize");
  }

  const double z = best_mass;
  const double s0 = best_s0;
  Prior squeezed;
  squeezed.support = prior.support;
  auto base = prior.density;
  const Domain support = prior.support;
  squeezed.density = [base, support, s0, s1, z](const RealVector& theta) {
    return base(theta) * taper(boundary_fraction(support, theta), s0, s1) / z;
  };
  squeezed.gradient = nullptr;  // finite differences via prior_gradient
  squeezed.density_cap = (prior.density_cap > 0.0 ? prior.density_cap : 0.0) / z;
  squeezed.name = prior.name + "_squeezed";
  if (info) {
    info->factor = 1.0 / z;
    info->truncated = z < 1.0 - 1e-9;
  }
  return squeezed;
}

}  // namespace qcrb::vantrees
