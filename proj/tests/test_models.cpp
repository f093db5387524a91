#include <doctest.h>

#include "oracles.hpp"
#include "qcrb/core.hpp"
#include "qcrb/errors.hpp"
#include "qcrb/fisher.hpp"
#include "qcrb/linalg.hpp"
#include "qcrb/models.hpp"
#include "qcrb/rng.hpp"

using namespace qcrb;

namespace {

RealVector random_point(const ParametricModel& model, double scale, Rng& rng) {
  RealVector theta = rng.normal_vector(model.param_dim());
  theta *= scale * rng.uniform() / theta.norm();
  return theta;
}

}  // namespace

TEST_CASE("builtin model states are valid and derivatives match finite differences") {
  Rng rng(61);
  RealVector mu(3);
  mu << 0.5, 0.3, 0.2;
  const std::vector<ParametricModel> zoo = {
      models::full_bloch(), models::equatorial(), models::bloch_line(),
      models::pure_state(2), models::pure_state(3), models::diagonal(mu)};
  for (const auto& model : zoo) {
    const RealVector theta = random_point(model, 0.2, rng);
    CHECK(model.state(theta).dim() >= 2);  // constructor validates the state
    const auto derivs = model.derivatives(theta);
    REQUIRE(static_cast<int>(derivs.size()) == model.param_dim());
    const double h = 1e-6;
    for (int i = 0; i < model.param_dim(); ++i) {
      RealVector tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      const Matrix fd = (model.state(tp).matrix() - model.state(tm).matrix()) / (2.0 * h);
      CHECK(linalg::frob_dist(derivs[i], fd) < 1e-7);
    }
  }
}

TEST_CASE("qubit fidelity loss is exact, not just local") {
  Rng rng(62);
  for (int p : {1, 2, 3}) {
    const auto loss = models::qubit_fidelity_loss(p);
    const ParametricModel model = p == 1   ? models::bloch_line()
                                  : p == 2 ? models::equatorial()
                                           : models::full_bloch();
    for (int trial = 0; trial < 30; ++trial) {
      const RealVector a = random_point(model, 0.9, rng);
      const RealVector b = random_point(model, 0.9, rng);
      const RealVector da = loss.psi(a) - loss.psi(b);
      const double quad = da.dot(loss.g_tilde(loss.psi(a)) * da);
      const double exact = 1.0 - fidelity(model.state(a), model.state(b));
      CHECK(std::abs(quad - exact) < 1e-10);
    }
  }
}

TEST_CASE("pure-state fidelity loss is exact on random chart pairs") {
  Rng rng(63);
  for (int d : {2, 3}) {
    const ParametricModel model = models::pure_state(d);
    const auto loss = models::pure_fidelity_loss(model);
    for (int trial = 0; trial < 30; ++trial) {
      const RealVector a = random_point(model, 0.6, rng);
      const RealVector b = random_point(model, 0.6, rng);
      const RealVector da = loss.psi(a) - loss.psi(b);
      const double quad = da.dot(loss.g_tilde(loss.psi(a)) * da);
      const double exact = 1.0 - fidelity(model.state(a), model.state(b));
      CHECK(std::abs(quad - exact) < 1e-10);
    }
  }
}

TEST_CASE("fidelity losses induce a quarter of the quantum information") {
  Rng rng(64);
  const std::vector<ParametricModel> zoo = {models::full_bloch(), models::equatorial(),
                                            models::bloch_line(), models::pure_state(2)};
  for (const auto& model : zoo) {
    const auto loss = models::fidelity_loss(model);
    const RealVector theta = random_point(model, 0.4, rng);
    const RealMatrix g0 = loss.g0(theta);
    const RealMatrix h = fisher::helstrom_info(model, theta).matrix;
    CHECK((g0 - 0.25 * h).cwiseAbs().maxCoeff() < 1e-6 * (1.0 + h.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("diagonal model is the classical multinomial family") {
  RealVector mu(3);
  mu << 0.5, 0.3, 0.2;
  const ParametricModel model = models::diagonal(mu);
  REQUIRE(model.param_dim() == 2);
  RealVector theta(2);
  theta << 0.05, -0.02;
  const Matrix rho = model.state(theta).matrix();
  CHECK(rho(0, 0).real() == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(rho(1, 1).real() == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(rho(2, 2).real() == doctest::Approx(0.17).epsilon(1e-12));
  CHECK(std::abs(rho(0, 1)) == 0.0);
  // The basis measurement is optimal for a classical family:
  // fisher_info = helstrom_info.
  const RealMatrix cl = fisher::fisher_info(model, theta, models::basis_povm(3)).matrix;
  const RealMatrix q = fisher::helstrom_info(model, theta).matrix;
  CHECK((cl - q).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("povm factories resolve the identity") {
  Rng rng(65);
  const std::vector<Povm> zoo = {
      models::basis_povm(3), models::rotated_basis_povm(rng.haar_unitary(3)),
      models::spin_axis_povm(Eigen::Vector3d(0, 0, 1)), models::pauli6_povm(),
      models::random_rank1_povm(2, 5, rng)};
  for (const Povm& povm : zoo) {
    Matrix sum = Matrix::Zero(povm.dim(), povm.dim());
    for (const Matrix& m : povm.elements()) {
      sum += m;
      CHECK(linalg::hermiticity_defect(m) < 1e-10);
      CHECK(linalg::min_eigenvalue(m) > -1e-10);
    }
    CHECK(linalg::frob_dist(sum, Matrix::Identity(povm.dim(), povm.dim())) < 1e-10);
  }
}

TEST_CASE("spin axis povm projects along the requested direction") {
  const Povm povm = models::spin_axis_povm(Eigen::Vector3d(0, 0, 1));
  REQUIRE(povm.n_outcomes() == 2);
  Matrix up = Matrix::Zero(2, 2), down = Matrix::Zero(2, 2);
  up(0, 0) = 1.0;
  down(1, 1) = 1.0;
  CHECK(linalg::frob_dist(povm.element(0), up) < 1e-12);
  CHECK(linalg::frob_dist(povm.element(1), down) < 1e-12);
  CHECK_THROWS_AS(models::spin_axis_povm(Eigen::Vector3d(0, 0, 0)), DomainError);
}

TEST_CASE("pauli six-outcome povm mixes the three spin bases evenly") {
  const Povm povm = models::pauli6_povm();
  REQUIRE(povm.n_outcomes() == 6);
  for (const Matrix& m : povm.elements()) {
    CHECK(m.trace().real() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  // Information of pauli6 on the full bloch model at the center: I = (1/3) I3.
  const RealMatrix info = fisher::fisher_info(models::full_bloch(),
                                              RealVector::Zero(3), povm).matrix;
  CHECK((info - RealMatrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("random rank-one povms have trace-one normalization on average") {
  Rng rng(66);
  const Povm povm = models::random_rank1_povm(3, 7, rng);
  REQUIRE(povm.n_outcomes() == 7);
  double total = 0.0;
  for (const Matrix& m : povm.elements()) total += m.trace().real();
  CHECK(total == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("pure_state chart reaches the reference ket at the origin") {
  for (int d : {2, 3}) {
    const ParametricModel model = models::pure_state(d);
    const Matrix rho = model.state(RealVector::Zero(2 * (d - 1))).matrix();
    Matrix expect = Matrix::Zero(d, d);
    expect(0, 0) = 1.0;
    CHECK(linalg::frob_dist(rho, expect) < 1e-12);
    // Purity everywhere in the chart.
    Rng rng(67);
    const RealVector theta = random_point(model, 0.5, rng);
    const Matrix r = model.state(theta).matrix();
    CHECK(std::abs((r * r).trace().real() - 1.0) < 1e-10);
  }
}
