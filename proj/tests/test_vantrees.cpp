#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcrb/core.hpp"
#include "qcrb/errors.hpp"
#include "qcrb/fisher.hpp"
#include "qcrb/holevo.hpp"
#include "qcrb/models.hpp"
#include "qcrb/vantrees.hpp"

using namespace qcrb;

namespace {

RealVector scalar(double t) {
  RealVector v(1);
  v << t;
  return v;
}

vantrees::Prior unit_interval_prior() {
  RealVector lo(1), hi(1);
  lo << -0.5;
  hi << 0.5;
  return vantrees::cos2_box_prior(lo, hi);
}

}  // namespace

TEST_CASE("cos2 box prior is normalized and vanishes on the boundary") {
  const auto report = vantrees::check_prior(unit_interval_prior());
  CHECK(report.normalized);
  CHECK(report.vanishes);
  CHECK(report.ok);
  CHECK(report.normalization == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ball bump prior is admissible in three dimensions") {
  const auto prior = vantrees::ball_bump_prior(3, 0.8);
  const auto report = vantrees::check_prior(prior);
  CHECK(report.ok);
}

TEST_CASE("uniform ball prior fails the boundary-vanishing requirement") {
  const auto prior = vantrees::uniform_ball_prior(2, 0.5);
  const auto report = vantrees::check_prior(prior);
  CHECK(report.normalized);
  CHECK_FALSE(report.vanishes);
  CHECK_FALSE(report.ok);
}

TEST_CASE("analytic prior gradients match finite differences") {
  const auto cos2 = unit_interval_prior();
  const auto bump = vantrees::ball_bump_prior(3, 0.8);
  for (double t : {-0.3, 0.0, 0.2, 0.45}) {
    const RealVector x = scalar(t);
    const double h = 1e-6;
    const double fd =
        (cos2.density(scalar(t + h)) - cos2.density(scalar(t - h))) / (2.0 * h);
    CHECK(vantrees::prior_gradient(cos2, x)[0] == doctest::Approx(fd).epsilon(1e-5));
  }
  RealVector x(3);
  x << 0.2, -0.1, 0.3;
  RealVector fd(3);
  for (int i = 0; i < 3; ++i) {
    RealVector xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    fd[i] = (bump.density(xp) - bump.density(xm)) / 2e-6;
  }
  CHECK((vantrees::prior_gradient(bump, x) - fd).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("prior sampling lands in the support with the right first moment") {
  Rng rng(41);
  const auto prior = unit_interval_prior();
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const RealVector x = vantrees::sample_prior(prior, rng);
    REQUIRE(prior.support.contains(x));
    mean += x[0];
  }
  mean /= n;
  // Symmetric density: mean 0, sd of the mean ~ 0.22/sqrt(n).
  CHECK(std::abs(mean) < 4.0 * 0.22 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("loss specifications carry consistent jacobians") {
  const auto loss = models::qubit_fidelity_loss(3);
  RealVector theta(3);
  theta << 0.2, -0.1, 0.4;
  const auto report = vantrees::check_loss(loss, theta);
  CHECK(report.ok);
  CHECK(report.jacobian_defect < 1e-6);
  CHECK(report.g0_min_eigenvalue > 0.0);
}

TEST_CASE("identity loss induces the identity weight") {
  const auto loss = vantrees::identity_loss(2);
  RealVector theta(2);
  theta << 0.3, 0.1;
  CHECK((loss.g0(theta) - RealMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  RealVector nodes, weights;
  vantrees::gauss_legendre(5, nodes, weights);
  REQUIRE(nodes.size() == 5);
  // Degree 9 is exact for 5 nodes: integrate x^8 over [-1, 1] = 2/9.
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) acc += weights[i] * std::pow(nodes[i], 8);
  CHECK(acc == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(weights.sum() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("box rule integrates a separable polynomial exactly") {
  RealVector lo(2), hi(2);
  lo << 0.0, -1.0;
  hi << 2.0, 1.0;
  const auto rule = vantrees::box_rule(lo, hi, 4);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const RealVector& x = rule.nodes[k];
    acc += rule.weights[k] * x[0] * x[0] * x[1] * x[1];
  }
  // int_0^2 x^2 dx * int_-1^1 y^2 dy = (8/3)(2/3).
  CHECK(acc == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("ball rule reproduces ball volumes") {
  for (int dim : {1, 2, 3}) {
    const double r = 0.7;
    const auto rule = vantrees::ball_rule(dim, r, 8);
    double vol = 0.0;
    for (double w : rule.weights) vol += w;
    const double expect = dim == 1   ? 2.0 * r
                          : dim == 2 ? M_PI * r * r
                                     : 4.0 * M_PI * r * r * r / 3.0;
    CHECK(vol == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("adaptive integration converges on smooth integrands") {
  const Domain box = Domain::box(scalar(-1.0), scalar(1.0));
  const auto result = vantrees::integrate_adaptive(
      box, 1, [](const RealVector& x) { return scalar(std::exp(-x[0] * x[0])); });
  CHECK(result.converged);
  CHECK(result.value[0] == doctest::Approx(1.4936482656248540).epsilon(1e-6));
}

TEST_CASE("doubling the quadrature level moves results by less than 1e-3") {
  const auto prior = unit_interval_prior();
  const ParametricModel model = models::bloch_line();
  const auto c_g0 = [&](const RealVector& t) { return 1.0 - t[0] * t[0]; };
  auto average_at = [&](int level) {
    const auto rule = vantrees::support_rule(prior.support, level);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      acc += rule.weights[k] * prior.density(rule.nodes[k]) * c_g0(rule.nodes[k]);
    return acc;
  };
  const double coarse = average_at(2);
  const double fine = average_at(3);
  CHECK(std::abs(fine - coarse) < 1e-3 * std::abs(fine));
}

TEST_CASE("optimal field in one parameter is the scalar bound over the weight") {
  // q = p = 1, Gtilde = g: C(t) = g psi' V0 = g * V0 = C_g(t)/1 with
  // V0 = C_g/g; identity loss has g = 1 so C(t) = C_1(t) = 1 - t^2.
  const ParametricModel model = models::bloch_line();
  const auto loss = vantrees::identity_loss(1);
  const auto field = vantrees::optimal_c_field(model, loss);
  for (double t : {-0.4, 0.0, 0.3}) {
    const RealMatrix c = field.c(scalar(t));
    REQUIRE(c.rows() == 1);
    const auto sol = holevo::holevo_bound(model, scalar(t),
                                          holevo::WeightMatrix(RealMatrix::Identity(1, 1)));
    CHECK(c(0, 0) == doctest::Approx(sol.value).epsilon(1e-6));
    CHECK(c(0, 0) == doctest::Approx(1.0 - t * t).epsilon(1e-5));
  }
}

TEST_CASE("optimal field recovers the constant bound on the equatorial grid") {
  const ParametricModel model = models::equatorial();
  const auto loss = models::qubit_fidelity_loss(2);
  const auto field = vantrees::optimal_c_field(model, loss);
  for (int k = 0; k < 20; ++k) {
    const double r = 0.1 + 0.03 * k;
    const double phi = 0.31 * k;
    RealVector theta(2);
    theta << r * std::cos(phi), r * std::sin(phi);
    // trace(G0 V0) = C_G0 = 1/2 everywhere in the model.
    const RealMatrix c = field.c(theta);
    const RealMatrix psi_j = loss.psi_jacobian(theta);
    // c = Gtilde psi' V0 -> trace(psi'^T c) = trace(G0 V0).
    const double value = (psi_j.transpose() * c).trace();
    CHECK(std::abs(value - 0.5) < 1e-3);
  }
}

TEST_CASE("prior information vanishes for the zero field") {
  const auto prior = unit_interval_prior();
  const auto loss = vantrees::identity_loss(1);
  vantrees::CField zero{[](const RealVector&) { return RealMatrix::Zero(1, 1); }};
  CHECK(vantrees::j_pi(prior, zero, loss) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("prior information of the cos2 window matches the closed form") {
  // For density (2/L)sin^2(pi(x-a)/L) and C = 1: J = 4 pi^2 / L^2.
  RealVector lo(1), hi(1);
  lo << -1.0;
  hi << 1.0;
  const auto prior = vantrees::cos2_box_prior(lo, hi);
  const auto loss = vantrees::identity_loss(1);
  vantrees::CField one{[](const RealVector&) { return RealMatrix::Identity(1, 1); }};
  const double j = vantrees::j_pi(prior, one, loss);
  const double expect = 4.0 * M_PI * M_PI / 4.0;
  CHECK(j == doctest::Approx(expect).epsilon(1e-4));

  // Independent quadrature of the closed-form integrand (pi')^2 / pi.
  const double quad = oracles::gl_integrate(-1.0, 1.0, 200, [&](double x) {
    const double h = 1e-6;
    const double d =
        (prior.density(scalar(x + h)) - prior.density(scalar(x - h))) / (2.0 * h);
    const double p = prior.density(scalar(x));
    return p > 1e-14 ? d * d / p : 0.0;
  });
  CHECK(j == doctest::Approx(quad).epsilon(1e-4));
}

TEST_CASE("prior information is finite and stable for the ball bump") {
  const auto prior = vantrees::ball_bump_prior(3, 0.8);
  const auto loss = vantrees::identity_loss(3);
  vantrees::CField field{[](const RealVector& t) {
    return RealMatrix((1.0 - t.squaredNorm()) * RealMatrix::Identity(3, 3));
  }};
  const double j1 = vantrees::j_pi(prior, field, loss);
  CHECK(std::isfinite(j1));
  CHECK(j1 > 0.0);
  const double j2 = vantrees::j_pi(prior, field, loss);
  CHECK(j1 == doctest::Approx(j2).epsilon(1e-12));
}

TEST_CASE("zero numerator makes the bound vacuous, not an error") {
  const ParametricModel model = models::bloch_line();
  const auto prior = unit_interval_prior();
  const auto loss = vantrees::identity_loss(1);
  vantrees::CField zero{[](const RealVector&) { return RealMatrix::Zero(1, 1); }};
  auto info = [&](const RealVector& t) {
    return fisher::fisher_info(model, t, models::basis_povm(2));
  };
  const auto breakdown =
      vantrees::van_trees_breakdown(model, prior, loss, zero, 100, info);
  CHECK(breakdown.rhs == 0.0);
  CHECK(breakdown.numerator_mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bayesian bound approaches the prior-averaged limit at large N") {
  // bloch line, z measurement, optimal field: at N = 1e4 the bound sits
  // within 2% of E_pi(1 - t^2).
  const ParametricModel model = models::bloch_line();
  const auto prior = unit_interval_prior();
  const auto loss = vantrees::identity_loss(1);
  const auto field = vantrees::optimal_c_field(model, loss);
  auto info = [&](const RealVector& t) {
    return fisher::fisher_info(model, t, models::basis_povm(2));
  };
  const auto breakdown =
      vantrees::van_trees_breakdown(model, prior, loss, field, 10000, info);
  const double average = oracles::gl_integrate(-0.5, 0.5, 60, [&](double t) {
    return prior.density(scalar(t)) * (1.0 - t * t);
  });
  CHECK(std::abs(breakdown.rhs - average) < 0.02 * average);
  CHECK(breakdown.rhs < average);
}

TEST_CASE("with the dual-cap field the bound has the closed ratio form") {
  // Substituting I = V0^-1 makes rhs = A^2 / (A + J/N) with
  // A = E_pi C_G0, so rhs >= A - J/N.
  const ParametricModel model = models::bloch_line();
  const auto prior = unit_interval_prior();
  const auto loss = vantrees::identity_loss(1);
  const auto field = vantrees::optimal_c_field(model, loss);
  const auto info = vantrees::dual_cap_info_field(model, loss);
  const long n = 10000;
  const auto breakdown = vantrees::van_trees_breakdown(model, prior, loss, field, n, info);
  const double a = vantrees::asymptotic_bound(model, prior, loss);
  const double expect = a * a / (a + breakdown.j_value / static_cast<double>(n));
  CHECK(std::abs(breakdown.rhs - expect) < 1e-8 * expect);
  CHECK(breakdown.rhs >= a - breakdown.j_value / static_cast<double>(n) - 1e-8);
  // Both means reduce to the same prior average of C_G0.
  CHECK(std::abs(breakdown.numerator_mean - a) < 1e-6 * a);
  CHECK(std::abs(breakdown.info_mean - a) < 1e-6 * a);
}

TEST_CASE("asymptotic bound for the full bloch model under a radial prior") {
  const ParametricModel model = models::full_bloch();
  const auto prior = vantrees::ball_bump_prior(3, 0.8);
  const auto loss = models::qubit_fidelity_loss(3);
  const double bound = vantrees::asymptotic_bound(model, prior, loss);
  // C_G0 = (3 + 2 r)/4 depends only on the radius; average it over the prior
  // with an independent radial quadrature (density (1-(r/R)^2)^2 * 4 pi r^2,
  // normalized).
  const double radius = 0.8;
  const double mass = oracles::gl_integrate(0.0, radius, 80, [&](double r) {
    const double b = 1.0 - (r / radius) * (r / radius);
    return b * b * 4.0 * M_PI * r * r;
  });
  const double average = oracles::gl_integrate(0.0, radius, 80, [&](double r) {
    const double b = 1.0 - (r / radius) * (r / radius);
    return b * b * 4.0 * M_PI * r * r * (3.0 + 2.0 * r) / 4.0;
  });
  CHECK(bound == doctest::Approx(average / mass).epsilon(2e-3));
}

TEST_CASE("asymptotic bound is flat where the pointwise bound is constant") {
  const ParametricModel equatorial = models::equatorial();
  const auto prior2 = vantrees::ball_bump_prior(2, 0.6);
  CHECK(vantrees::asymptotic_bound(equatorial, prior2,
                                   models::qubit_fidelity_loss(2)) ==
        doctest::Approx(0.5).epsilon(2e-3));

  const ParametricModel pure = models::pure_state(2);
  const auto prior_pure = vantrees::ball_bump_prior(2, 0.5);
  CHECK(vantrees::asymptotic_bound(pure, prior_pure, models::pure_fidelity_loss(pure)) ==
        doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("squeezing an admissible prior stays within the density budget") {
  const auto prior = unit_interval_prior();
  vantrees::SqueezeInfo info;
  const auto squeezed = vantrees::prior_squeeze(prior, 0.1, 0.02, &info);
  CHECK(info.factor <= 1.1 + 1e-9);
  const auto report = vantrees::check_prior(squeezed);
  CHECK(report.ok);
  // Pointwise domination: squeezed <= factor * original.
  for (double t : {-0.45, -0.2, 0.0, 0.3, 0.44}) {
    CHECK(squeezed.density(scalar(t)) <=
          info.factor * prior.density(scalar(t)) + 1e-9);
  }
}

TEST_CASE("squeezing repairs the uniform ball prior") {
  const auto uniform = vantrees::uniform_ball_prior(2, 0.5);
  vantrees::SqueezeInfo info;
  const auto squeezed = vantrees::prior_squeeze(uniform, 0.1, 0.05, &info);
  const auto report = vantrees::check_prior(squeezed);
  CHECK(report.ok);
  CHECK(info.truncated);
  CHECK(info.factor >= 1.0);
}

TEST_CASE("squeezed priors approach the unsqueezed average as eps shrinks") {
  const ParametricModel model = models::bloch_line();
  const auto loss = vantrees::identity_loss(1);
  RealVector lo(1), hi(1);
  lo << -0.5;
  hi << 0.5;
  const auto base = vantrees::cos2_box_prior(lo, hi);
  const double target = vantrees::asymptotic_bound(model, base, loss);
  double previous = 1e9;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto squeezed = vantrees::prior_squeeze(base, eps, eps / 4.0);
    const double value = vantrees::asymptotic_bound(model, squeezed, loss);
    const double gap = std::abs(value - target);
    CHECK(gap <= previous + 1e-3);
    previous = gap;
  }
  CHECK(previous < 5e-3);
}
