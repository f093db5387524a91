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

RealVector scalar(double t) {
  RealVector v(1);
  v << t;
  return v;
}

}  // namespace

TEST_CASE("classical information of the z-basis on the bloch line") {
  const ParametricModel model = models::bloch_line();
  const Povm basis = models::basis_povm(2);

  // p = ((1+t)/2, (1-t)/2): I(t) = 1/(1 - t^2).
  const RealMatrix at0 = fisher::fisher_info(model, scalar(0.0), basis).matrix;
  REQUIRE(at0.rows() == 1);
  CHECK(at0(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

  const RealMatrix at6 = fisher::fisher_info(model, scalar(0.6), basis).matrix;
  CHECK(at6(0, 0) == doctest::Approx(1.5625).epsilon(1e-10));
  const RealMatrix fd = oracles::fd_fisher_info(model, scalar(0.6), basis);
  CHECK(std::abs(at6(0, 0) - fd(0, 0)) < 1e-6);
}

TEST_CASE("z-basis information on the full bloch model is rank one") {
  const ParametricModel model = models::full_bloch();
  const RealMatrix info =
      fisher::fisher_info(model, RealVector::Zero(3), models::basis_povm(2)).matrix;
  RealMatrix expect = RealMatrix::Zero(3, 3);
  expect(2, 2) = 1.0;
  CHECK((info - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fisher_info matches the finite-difference oracle on random models") {
  Rng rng(21);
  for (int d : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      const ParametricModel model = oracles::random_affine_model(d, 2, rng);
      const Povm povm = models::random_rank1_povm(d, 4, rng);
      const RealVector theta = 0.1 * rng.normal_vector(2);
      const RealMatrix info = fisher::fisher_info(model, theta, povm).matrix;
      const RealMatrix fd = oracles::fd_fisher_info(model, theta, povm);
      CHECK((info - fd).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + fd.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("fisher information matrices are symmetric positive semidefinite") {
  Rng rng(22);
  const ParametricModel model = models::full_bloch();
  for (int trial = 0; trial < 20; ++trial) {
    RealVector theta = rng.normal_vector(3);
    theta *= 0.7 * rng.uniform() / theta.norm();
    const Povm povm = models::random_rank1_povm(2, 4, rng);
    const RealMatrix info = fisher::fisher_info(model, theta, povm).matrix;
    CHECK(linalg::is_symmetric(info, 1e-10));
    CHECK(linalg::min_eigenvalue(info.cast<cxd>()) > -1e-10);
  }
}

TEST_CASE("sld of the bloch line at the origin is sigma_z") {
  const auto slds = fisher::sld(models::bloch_line(), scalar(0.0));
  REQUIRE(slds.size() == 1);
  Matrix sz(2, 2);
  sz << 1, 0, 0, -1;
  CHECK(linalg::frob_dist(slds[0], sz) < 1e-10);
}

TEST_CASE("sld of a diagonal family is the diagonal score") {
  // rho = diag((1+t)/2, (1-t)/2) at t = 0.5: L = diag(1/1.5, -1/0.5).
  const auto slds = fisher::sld(models::bloch_line(), scalar(0.5));
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 1.0 / 1.5;
  expect(1, 1) = -1.0 / 0.5;
  CHECK(linalg::frob_dist(slds[0], expect) < 1e-10);
}

TEST_CASE("sld satisfies its defining equation") {
  Rng rng(23);
  for (int d : {2, 3}) {
    const ParametricModel model = oracles::random_affine_model(d, 2, rng);
    const RealVector theta = 0.05 * rng.normal_vector(2);
    const Matrix rho = model.state(theta).matrix();
    const auto derivs = model.derivatives(theta);
    const auto slds = fisher::sld(model, theta);
    REQUIRE(slds.size() == 2);
    for (int i = 0; i < 2; ++i) {
      const Matrix residual = 0.5 * (slds[i] * rho + rho * slds[i]) - derivs[i];
      CHECK(residual.cwiseAbs().maxCoeff() < 1e-6);
      CHECK(linalg::hermiticity_defect(slds[i]) < 1e-8);
    }
  }
}

TEST_CASE("helstrom information of the full bloch model at the origin") {
  const RealMatrix h =
      fisher::helstrom_info(models::full_bloch(), RealVector::Zero(3)).matrix;
  CHECK((h - RealMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("helstrom information on the bloch line") {
  const RealMatrix h = fisher::helstrom_info(models::bloch_line(), scalar(0.6)).matrix;
  CHECK(h(0, 0) == doctest::Approx(1.0 / (1.0 - 0.36)).epsilon(1e-8));
}

TEST_CASE("helstrom information matches the numeric curvature oracle") {
  Rng rng(24);
  const ParametricModel model = models::full_bloch();
  for (int trial = 0; trial < 5; ++trial) {
    RealVector theta = rng.normal_vector(3);
    theta *= 0.5 * rng.uniform() / theta.norm();
    const RealMatrix h = fisher::helstrom_info(model, theta).matrix;
    const RealMatrix numeric = oracles::numeric_helstrom(model, theta);
    CHECK((h - numeric).cwiseAbs().maxCoeff() < 1e-3 * h.norm());
  }
}

TEST_CASE("sld and fidelity-curvature paths agree on full-rank models") {
  Rng rng(25);
  for (int d : {2, 3}) {
    for (int trial = 0; trial < 25; ++trial) {
      const int p = 1 + (trial % 2);
      const ParametricModel model = oracles::random_affine_model(d, p, rng);
      const RealVector theta = 0.05 * rng.normal_vector(p);
      const RealMatrix via_sld = fisher::helstrom_info(model, theta).matrix;
      const RealMatrix via_fid = fisher::helstrom_info_fidelity(model, theta).matrix;
      CHECK((via_sld - via_fid).cwiseAbs().maxCoeff() <
            1e-3 * (1.0 + via_sld.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("fidelity-curvature path handles rank-deficient states") {
  const ParametricModel model = models::pure_state(2);
  RealVector theta(2);
  theta << 0.2, 0.1;
  const RealMatrix h = fisher::helstrom_info(model, theta).matrix;
  CHECK(linalg::is_symmetric(h, 1e-8));
  CHECK(linalg::min_eigenvalue(h.cast<cxd>()) > 0.0);
  // Pure qubit family: quantum information of the chart is bounded below by
  // the curvature of the fidelity ball; compare against the numeric oracle.
  const RealMatrix numeric = oracles::numeric_helstrom(model, theta);
  CHECK((h - numeric).cwiseAbs().maxCoeff() < 2e-3 * h.norm());
}

TEST_CASE("measurement information never exceeds the quantum information") {
  Rng rng(26);
  const ParametricModel model = models::full_bloch();
  for (int trial = 0; trial < 20; ++trial) {
    RealVector theta = rng.normal_vector(3);
    theta *= 0.6 * rng.uniform() / theta.norm();
    const Povm povm = models::random_rank1_povm(2, 3 + trial % 3, rng);
    const RealMatrix gap = fisher::helstrom_info(model, theta).matrix -
                           fisher::fisher_info(model, theta, povm).matrix;
    CHECK(linalg::min_eigenvalue(gap.cast<cxd>()) > -1e-6);
  }
}

TEST_CASE("coarse-graining a povm cannot increase information") {
  Rng rng(27);
  const ParametricModel model = models::full_bloch();
  RealVector theta(3);
  theta << 0.2, -0.1, 0.3;
  for (int trial = 0; trial < 10; ++trial) {
    const Povm fine = models::random_rank1_povm(2, 4, rng);
    std::vector<Matrix> merged = {fine.elements()[0] + fine.elements()[1],
                                  fine.elements()[2] + fine.elements()[3]};
    const Povm coarse(2, merged);
    const RealMatrix gap = fisher::fisher_info(model, theta, fine).matrix -
                           fisher::fisher_info(model, theta, coarse).matrix;
    CHECK(linalg::min_eigenvalue(gap.cast<cxd>()) > -1e-8);
  }
}

TEST_CASE("information transforms covariantly under reparametrization") {
  // theta = A eta: I_eta = A^T I_theta A.
  Rng rng(28);
  const ParametricModel base = models::equatorial();
  RealMatrix a(2, 2);
  a << 1.2, 0.3, -0.4, 0.9;
  auto state_fn = [&base, a](const RealVector& eta) {
    return base.state(a * eta).matrix();
  };
  const ParametricModel reparam(2, Domain::ball(2, 0.3), state_fn, nullptr,
                                "reparametrized");
  RealVector eta(2);
  eta << 0.1, -0.15;
  const Povm povm = models::pauli6_povm();
  const RealMatrix i_eta = fisher::fisher_info(reparam, eta, povm).matrix;
  const RealMatrix i_theta = fisher::fisher_info(base, a * eta, povm).matrix;
  CHECK((i_eta - a.transpose() * i_theta * a).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("average_info with one copy reduces to fisher_info") {
  const ParametricModel model = models::bloch_line();
  const Povm basis = models::basis_povm(2);
  const RealMatrix avg = fisher::average_info(model, scalar(0.3), basis, 1).matrix;
  const RealMatrix single = fisher::fisher_info(model, scalar(0.3), basis).matrix;
  CHECK((avg - single).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("product povm on three copies gives the single-copy information") {
  const ParametricModel model = models::bloch_line();
  const Povm basis = models::basis_povm(2);
  std::vector<Matrix> product;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        product.push_back(linalg::kron(linalg::kron(basis.elements()[a],
                                                    basis.elements()[b]),
                                       basis.elements()[c]));
  const RealMatrix avg =
      fisher::average_info(model, scalar(0.4), Povm(8, product), 3).matrix;
  const RealMatrix single = fisher::fisher_info(model, scalar(0.4), basis).matrix;
  CHECK(std::abs(avg(0, 0) - single(0, 0)) < 1e-8);
}

TEST_CASE("collective measurements respect the per-copy information cap") {
  // trace(H^-1 avg) <= d - 1 for pure-state models, any collective povm.
  Rng rng(29);
  const ParametricModel model = models::pure_state(2);
  RealVector theta(2);
  theta << 0.15, -0.1;
  const RealMatrix h = fisher::helstrom_info(model, theta).matrix;
  const RealMatrix hinv = h.inverse();
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix u = rng.haar_unitary(4);
    const Povm collective = models::rotated_basis_povm(u);
    const RealMatrix avg = fisher::average_info(model, theta, collective, 2).matrix;
    CHECK((hinv * avg).trace() <= 1.0 + 1e-6);
  }
}

TEST_CASE("average_info rejects oversized product spaces") {
  const ParametricModel model = models::bloch_line();
  CHECK_THROWS_AS(
      fisher::average_info(model, scalar(0.1), models::basis_povm(2), 13),
      ResourceError);
}
