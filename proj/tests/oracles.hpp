// Independent reference computations the tests compare library results
// against.  Everything here is deliberately written the "slow but obvious"
// way (finite differences, dense linear solves) so it shares no code with the
// implementations under test.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "qcrb/core.hpp"
#include "qcrb/rng.hpp"

namespace oracles {

using qcrb::cxd;
using qcrb::Matrix;
using qcrb::RealMatrix;
using qcrb::RealVector;

/// Classical Fisher information from central differences of the outcome
/// probabilities (step h on each parameter).
inline RealMatrix fd_fisher_info(const qcrb::ParametricModel& model,
                                 const RealVector& theta, const qcrb::Povm& povm,
                                 double h = 1e-5) {
  const int p = model.param_dim();
  const qcrb::OutcomeDistribution base =
      qcrb::born_distribution(model.state(theta), povm);
  const int n = base.n_outcomes();
  RealMatrix dp(p, n);
  for (int i = 0; i < p; ++i) {
    RealVector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const auto plus = qcrb::born_distribution(model.state(tp), povm);
    const auto minus = qcrb::born_distribution(model.state(tm), povm);
    for (int x = 0; x < n; ++x) {
      dp(i, x) = (plus.probabilities[x] - minus.probabilities[x]) / (2.0 * h);
    }
  }
  RealMatrix info = RealMatrix::Zero(p, p);
  for (int x = 0; x < n; ++x) {
    const double px = base.probabilities[x];
    if (px <= 1e-12) continue;
    info += dp.col(x) * dp.col(x).transpose() / px;
  }
  return info;
}

/// Quantum information from the local curvature of 1 - fidelity:
/// H_ij = 2 d^2/(ds dt) [1 - F(rho(theta + s e_i + t e_j), rho(theta))],
/// plain central differences, no refinement.
inline RealMatrix numeric_helstrom(const qcrb::ParametricModel& model,
                                   const RealVector& theta, double h = 1e-2) {
  const int p = model.param_dim();
  const qcrb::QuantumState base = model.state(theta);
  auto loss = [&](const RealVector& d) {
    return 1.0 - qcrb::fidelity(model.state(theta + d), base);
  };
  RealMatrix hess(p, p);
  for (int i = 0; i < p; ++i) {
    RealVector ei = RealVector::Zero(p);
    ei[i] = h;
    hess(i, i) = (loss(ei) + loss(-ei)) / (h * h);
    for (int j = i + 1; j < p; ++j) {
      RealVector ej = RealVector::Zero(p);
      ej[j] = h;
      const double mixed =
          (loss(ei + ej) - loss(ei - ej) - loss(-ei + ej) + loss(-ei - ej)) /
          (4.0 * h * h);
      hess(i, j) = hess(j, i) = mixed;
    }
  }
  return 2.0 * hess;
}

/// One-parameter variance bound by direct minimization: minimize
/// trace(rho X^2) over Hermitian X with trace(drho X) = 1, expanded in the
/// orthonormal Hermitian basis and solved as an equality-constrained
/// least-squares problem.  Returns g * minimum.
inline double one_param_bound(const qcrb::ParametricModel& model,
                              const RealVector& theta, double g) {
  const Matrix rho = model.state(theta).matrix();
  const Matrix drho = model.derivatives(theta)[0];
  const std::vector<Matrix> basis = qcrb::hermitian_basis(static_cast<int>(rho.rows()));
  const int n = static_cast<int>(basis.size());
  RealMatrix m(n, n);
  RealVector b(n);
  for (int a = 0; a < n; ++a) {
    b[a] = (drho * basis[a]).trace().real();
    for (int c = 0; c < n; ++c) {
      // Re trace(rho B_a B_c), symmetrized: the objective only sees the
      // symmetric part.
      m(a, c) = 0.5 * ((rho * basis[a] * basis[c]).trace().real() +
                       (rho * basis[c] * basis[a]).trace().real());
    }
  }
  const RealVector w = m.ldlt().solve(b);
  return g / b.dot(w);
}

/// Ginibre-random density matrix.
inline qcrb::QuantumState random_state(int d, qcrb::Rng& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cxd(rng.normal(), rng.normal());
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return qcrb::QuantumState(rho);
}

/// Random traceless Hermitian matrix with entries O(scale).
inline Matrix random_traceless_hermitian(int d, double scale, qcrb::Rng& rng) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cxd(rng.normal(), rng.normal());
  Matrix h = 0.5 * scale * (a + a.adjoint());
  h -= (h.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
  return h;
}

/// Random affine full-rank model rho0 + sum theta_i G_i around theta = 0.
inline qcrb::ParametricModel random_affine_model(int d, int p, qcrb::Rng& rng,
                                                 double scale = 0.05) {
  // Mix toward the maximally mixed state and pin each generator's spectral
  // norm to `scale` so rho(theta) stays strictly positive on the whole ball:
  // min eig >= 0.5/d - sqrt(p)*0.5*scale > 0 for the sizes used in tests.
  const Matrix rho0 = 0.5 * random_state(d, rng).matrix() +
                      0.5 / d * Matrix::Identity(d, d);
  std::vector<Matrix> gens;
  for (int i = 0; i < p; ++i) {
    Matrix g = random_traceless_hermitian(d, scale, rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    g *= scale / std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
    gens.push_back(g);
  }
  auto state_fn = [rho0, gens](const RealVector& theta) {
    Matrix m = rho0;
    for (int i = 0; i < theta.size(); ++i) m += theta[i] * gens[i];
    return m;
  };
  auto deriv_fn = [gens](const RealVector&) { return gens; };
  return qcrb::ParametricModel(p, qcrb::Domain::ball(p, 0.5), state_fn, deriv_fn,
                               "random_affine");
}

/// Gauss-Legendre quadrature of f over [a, b], n nodes, written from the
/// recurrence directly (independent of the library's rule).
inline double gl_integrate(double a, double b, int n,
                           const std::function<double(double)>& f) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double t_new = t - p1 / dp;
      if (std::abs(t_new - t) < 1e-15) {
        t = t_new;
        break;
      }
      t = t_new;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[i] * 0.5 * (b - a) * f(0.5 * (b - a) * x[i] + 0.5 * (a + b));
  }
  return acc;
}

}  // namespace oracles
