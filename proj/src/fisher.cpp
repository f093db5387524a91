#include "qcrb/fisher.hpp"

#include <cmath>

namespace qcrb::fisher {

InfoMatrix fisher_info(const ParametricModel& model, const RealVector& theta,
                       const Povm& povm) {
  const QuantumState rho = model.state(theta);
  if (rho.dim() != povm.dim()) {
    throw DimensionError("fisher_info: state/POVM dimension mismatch");
  }
  const std::vector<Matrix> derivs = model.derivatives(theta);
  const OutcomeDistribution dist = born_distribution(rho, povm);
  const int p = model.param_dim();
  RealMatrix info = RealMatrix::Zero(p, p);
  std::vector<double> dp(p);
  for (int x = 0; x < povm.n_outcomes(); ++x) {
    const double px = dist.probabilities[x];
    double max_abs_dp = 0.0;
    for (int i = 0; i < p; ++i) {
      dp[i] = (derivs[i] * povm.element(x)).trace().real();
      max_abs_dp = std::max(max_abs_dp, std::abs(dp[i]));
    }
    if (px <= kZeroProbTol) {
      if (max_abs_dp > kZeroDerivTol) {
        throw SingularModelError(
            "fisher_info: zero-probability outcome with nonzero derivative");
      }
      continue;
    }
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) info(i, j) += dp[i] * dp[j] / px;
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < i; ++j) info(i, j) = info(j, i);
  return {info, InfoKind::Measurement};
}

std::vector<Matrix> sld(const ParametricModel& model, const RealVector& theta) {
  const QuantumState rho = model.state(theta);
  const std::vector<Matrix> derivs = model.derivatives(theta);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const RealVector mu = es.eigenvalues();
  if (mu.minCoeff() <= kSldMinEig) {
    throw SingularStateError(
        "sld: state eigenvalue below floor; use helstrom_info_fidelity");
  }
  const Matrix& u = es.eigenvectors();
  const int d = rho.dim();
  std::vector<Matrix> out;
  out.reserve(derivs.size());
  for (const Matrix& drho : derivs) {
    const Matrix dr = u.adjoint() * drho * u;
    Matrix l(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) l(a, b) = 2.0 * dr(a, b) / (mu[a] + mu[b]);
    out.push_back(u * l * u.adjoint());
  }
  return out;
}

InfoMatrix helstrom_info(const ParametricModel& model, const RealVector& theta) {
  const QuantumState rho = model.state(theta);
  if (rho.min_eigenvalue() > kSldMinEig) {
    const std::vector<Matrix> lambdas = sld(model, theta);
    const int p = model.param_dim();
    RealMatrix h(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) {
        h(i, j) = (rho.matrix() * lambdas[i] * lambdas[j]).trace().real();
        h(j, i) = h(i, j);
      }
    h = 0.5 * (h + h.transpose().eval());
    return {h, InfoKind::Helstrom};
  }
  InfoMatrix viaf = helstrom_info_fidelity(model, theta);
  viaf.kind = InfoKind::Helstrom;
  return viaf;
}

namespace {

RealMatrix fidelity_hessian(const ParametricModel& model, const RealVector& theta,
                            double h) {
  const QuantumState rho0 = model.state(theta);
  const int p = model.param_dim();
  auto loss = [&](const RealVector& delta) {
    return 1.0 - fidelity(model.state(theta + delta), rho0);
  };
  RealMatrix hess(p, p);
  for (int i = 0; i < p; ++i) {
    RealVector e = RealVector::Zero(p);
    e[i] = h;
    hess(i, i) = (loss(e) + loss(-e)) / (h * h);
    for (int j = i + 1; j < p; ++j) {
      RealVector f = RealVector::Zero(p);
      f[j] = h;
      hess(i, j) = (loss(e + f) - loss(e - f) - loss(f - e) + loss(-e - f)) /
                   (4.0 * h * h);
      hess(j, i) = hess(i, j);
    }
  }
  return hess;
}

}  // namespace

InfoMatrix helstrom_info_fidelity(const ParametricModel& model,
                                  const RealVector& theta) {
  const double h = kHessianStep;
  const RealMatrix coarse = fidelity_hessian(model, theta, h);
  const RealMatrix fine = fidelity_hessian(model, theta, 0.5 * h);
  // Richardson: O(h^2) error cancels between the two stencils.
  const RealMatrix hess = (4.0 * fine - coarse) / 3.0;
  return {2.0 * hess, InfoKind::Helstrom};
}

InfoMatrix average_info(const ParametricModel& model, const RealVector& theta,
                        const Povm& collective_povm, int n_copies) {
  if (n_copies < 1) throw DomainError("average_info: n_copies must be >= 1");
  const int d = model.state(theta).dim();
  double total_dim = 1.0;
  for (int c = 0; c < n_copies; ++c) {
    total_dim *= d;
    if (total_dim > 4096.0) {
      throw ResourceError("average_info: product dimension exceeds 4096");
    }
  }
  if (collective_povm.dim() != static_cast<int>(total_dim)) {
    throw DimensionError("average_info: POVM dimension must be dim^n_copies");
  }
  auto power_state = [&, n_copies](const RealVector& t) {
    Matrix out = Matrix::Identity(1, 1);
    const Matrix rho = model.state(t).matrix();
    for (int c = 0; c < n_copies; ++c) out = linalg::kron(out, rho);
    return out;
  };
  auto power_derivs = [&, n_copies](const RealVector& t) {
    const Matrix rho = model.state(t).matrix();
    const std::vector<Matrix> derivs = model.derivatives(t);
    std::vector<Matrix> out;
    out.reserve(derivs.size());
    for (const Matrix& dr : derivs) {
      Matrix total = Matrix::Zero(static_cast<Eigen::Index>(total_dim),
                                  static_cast<Eigen::Index>(total_dim));
      for (int slot = 0; slot < n_copies; ++slot) {
        Matrix term = Matrix::Identity(1, 1);
        for (int c = 0; c < n_copies; ++c) {
          term = linalg::kron(term, c == slot ? dr : rho);
        }
        total += term;
      }
      out.push_back(total);
    }
    return out;
  };
  ParametricModel product(model.param_dim(), model.domain(), power_state, power_derivs,
                          model.name() + "^" + std::to_string(n_copies));
  InfoMatrix info = fisher_info(product, theta, collective_povm);
  info.matrix /= static_cast<double>(n_copies);
  info.kind = InfoKind::AveragePerCopy;
  return info;
}

}  // namespace qcrb::fisher
