#include "qcrb/models.hpp"

#include <cmath>

namespace qcrb::models {
namespace {

Matrix pauli(int k) {
  Matrix m(2, 2);
  switch (k) {
    case 1:
      m << 0, 1, 1, 0;
      break;
    case 2:
      m << 0, cxd(0, -1), cxd(0, 1), 0;
      break;
    default:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

ParametricModel bloch_plane_model(const std::vector<int>& axes, std::string name) {
  const int p = static_cast<int>(axes.size());
  std::vector<Matrix> derivs;
  for (int axis : axes) derivs.push_back(0.5 * pauli(axis));
  auto state_fn = [axes](const RealVector& theta) {
    Matrix rho = 0.5 * Matrix::Identity(2, 2);
    for (std::size_t i = 0; i < axes.size(); ++i) rho += 0.5 * theta[i] * pauli(axes[i]);
    return rho;
  };
  auto deriv_fn = [derivs](const RealVector&) { return derivs; };
  return ParametricModel(p, Domain::ball(p, 1.0), state_fn, deriv_fn, std::move(name));
}

}  // namespace

ParametricModel full_bloch() { return bloch_plane_model({1, 2, 3}, "full_bloch"); }

ParametricModel equatorial() { return bloch_plane_model({1, 2}, "equatorial"); }

ParametricModel bloch_line() { return bloch_plane_model({3}, "bloch_line"); }

ParametricModel pure_state(int d) {
  if (d < 2) throw DimensionError("pure_state: need d >= 2");
  const int p = 2 * (d - 1);
  auto amplitude = [d](const RealVector& theta) {
    Eigen::VectorXcd phi(d);
    phi[0] = std::sqrt(std::max(1.0 - theta.squaredNorm(), 0.0));
    for (int k = 1; k < d; ++k) {
      phi[k] = cxd(theta[2 * k - 2], theta[2 * k - 1]);
    }
    return phi;
  };
  auto state_fn = [amplitude](const RealVector& theta) {
    const Eigen::VectorXcd phi = amplitude(theta);
    return Matrix(phi * phi.adjoint());
  };
  auto deriv_fn = [amplitude, d, p](const RealVector& theta) {
    const Eigen::VectorXcd phi = amplitude(theta);
    const double s = std::sqrt(std::max(1.0 - theta.squaredNorm(), 0.0));
    std::vector<Matrix> out;
    out.reserve(p);
    for (int i = 0; i < p; ++i) {
      Eigen::VectorXcd dphi = Eigen::VectorXcd::Zero(d);
      dphi[0] = (s > 0.0) ? -theta[i] / s : 0.0;
      const int k = i / 2 + 1;
      dphi[k] = (i % 2 == 0) ? cxd(1, 0) : cxd(0, 1);
      Matrix dm = dphi * phi.adjoint() + phi * dphi.adjoint();
      out.push_back(dm);
    }
    return out;
  };
  return ParametricModel(p, Domain::ball(p, 0.9), state_fn, deriv_fn,
                         "pure_state_" + std::to_string(d));
}

ParametricModel diagonal(const RealVector& mu) {
  const int d = static_cast<int>(mu.size());
  if (d < 2) throw DimensionError("diagonal: need d >= 2");
  double mu_min = mu.minCoeff();
  if (mu_min <= 0.0 || std::abs(mu.sum() - 1.0) > 1e-10) {
    throw DomainError("diagonal: mu must be a strictly positive distribution");
  }
  const int p = d - 1;
  RealVector mu_c = mu;
  auto state_fn = [mu_c, d](const RealVector& theta) {
    Matrix rho = Matrix::Zero(d, d);
    double tail = mu_c[d - 1];
    for (int i = 0; i + 1 < d; ++i) {
      rho(i, i) = mu_c[i] + theta[i];
      tail -= theta[i];
    }
    rho(d - 1, d - 1) = tail;
    return rho;
  };
  std::vector<Matrix> derivs;
  for (int i = 0; i + 1 < d; ++i) {
    Matrix dm = Matrix::Zero(d, d);
    dm(i, i) = 1.0;
    dm(d - 1, d - 1) = -1.0;
    derivs.push_back(dm);
  }
  auto deriv_fn = [derivs](const RealVector&) { return derivs; };
  // Stay strictly inside the simplex.
  return ParametricModel(p, Domain::ball(p, 0.9 * mu_min), state_fn, deriv_fn,
                         "diagonal");
}

vantrees::LossSpec qubit_fidelity_loss(int p) {
  if (p < 1 || p > 3) throw DimensionError("qubit_fidelity_loss: p must be 1..3");
  vantrees::LossSpec loss;
  loss.p = p;
  loss.q = p + 1;
  loss.psi = [p](const RealVector& theta) {
    RealVector out(p + 1);
    out.head(p) = theta;
    out[p] = std::sqrt(std::max(1.0 - theta.squaredNorm(), 0.0));
    return out;
  };
  loss.psi_jacobian = [p](const RealVector& theta) {
    RealMatrix jac = RealMatrix::Zero(p + 1, p);
    jac.topRows(p).setIdentity();
    const double s = std::sqrt(std::max(1.0 - theta.squaredNorm(), 0.0));
    for (int i = 0; i < p; ++i) jac(p, i) = (s > 0.0) ? -theta[i] / s : 0.0;
    return jac;
  };
  loss.g_tilde = [p](const RealVector&) {
    return RealMatrix(0.25 * RealMatrix::Identity(p + 1, p + 1));
  };
  loss.name = "fidelity";
  return loss;
}

vantrees::LossSpec pure_fidelity_loss(const ParametricModel& model) {
  const int p = model.param_dim();
  // Probe the dimension from the model itself.
  const int d = static_cast<int>(
      model.state(RealVector::Zero(p)).matrix().rows());
  vantrees::LossSpec loss;
  loss.p = p;
  loss.q = 2 * d * d;
  auto pack = [d](const Matrix& m) {
    RealVector out(2 * d * d);
    int idx = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        out[idx++] = m(i, j).real();
        out[idx++] = m(i, j).imag();
      }
    return out;
  };
  ParametricModel m = model;
  loss.psi = [m, pack](const RealVector& theta) {
    return pack(m.state(theta).matrix());
  };
  loss.psi_jacobian = [m, pack, p](const RealVector& theta) {
    const std::vector<Matrix> derivs = m.derivatives(theta);
    RealMatrix jac(static_cast<int>(pack(derivs[0]).size()), p);
    for (int i = 0; i < p; ++i) jac.col(i) = pack(derivs[i]);
    return jac;
  };
  const int q = loss.q;
  loss.g_tilde = [q](const RealVector&) {
    return RealMatrix(0.5 * RealMatrix::Identity(q, q));
  };
  loss.name = "fidelity";
  return loss;
}

vantrees::LossSpec fidelity_loss(const ParametricModel& model) {
  const std::string& name = model.name();
  if (name == "full_bloch") return qubit_fidelity_loss(3);
  if (name == "equatorial") return qubit_fidelity_loss(2);
  if (name == "bloch_line") return qubit_fidelity_loss(1);
  if (name.rfind("pure_state_", 0) == 0) return pure_fidelity_loss(model);
  throw DomainError("fidelity_loss: no fidelity embedding for model '" + name + "'");
}

Povm basis_povm(int d) {
  std::vector<Matrix> elements;
  for (int i = 0; i < d; ++i) {
    Matrix m = Matrix::Zero(d, d);
    m(i, i) = 1.0;
    elements.push_back(m);
  }
  return Povm(d, elements);
}

Povm rotated_basis_povm(const Matrix& u) {
  const int d = static_cast<int>(u.rows());
  if (u.cols() != d || (u.adjoint() * u - Matrix::Identity(d, d)).norm() > 1e-8) {
    throw DomainError("rotated_basis_povm: input is not unitary");
  }
  std::vector<Matrix> elements;
  for (int i = 0; i < d; ++i) {
    elements.push_back(u.col(i) * u.col(i).adjoint());
  }
  return Povm(d, elements);
}

Povm spin_axis_povm(const Eigen::Vector3d& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-8) {
    throw DomainError("spin_axis_povm: axis must be a unit vector");
  }
  Matrix n = axis[0] * pauli(1) + axis[1] * pauli(2) + axis[2] * pauli(3);
  std::vector<Matrix> elements = {0.5 * (Matrix::Identity(2, 2) + n),
                                  0.5 * (Matrix::Identity(2, 2) - n)};
  return Povm(2, elements);
}

Povm pauli6_povm() {
  std::vector<Matrix> elements;
  for (int k = 1; k <= 3; ++k) {
    for (double sign : {1.0, -1.0}) {
      elements.push_back((1.0 / 3.0) * 0.5 *
                         (Matrix::Identity(2, 2) + sign * pauli(k)));
    }
  }
  return Povm(2, elements);
}

Povm random_rank1_povm(int d, int n_outcomes, Rng& rng) {
  if (n_outcomes < d) {
    throw DomainError("random_rank1_povm: need at least d outcomes");
  }
  std::vector<Matrix> raw;
  Matrix total = Matrix::Zero(d, d);
  for (int i = 0; i < n_outcomes; ++i) {
    Eigen::VectorXcd g(d);
    for (int j = 0; j < d; ++j) g[j] = cxd(rng.normal(), rng.normal());
    Matrix a = g * g.adjoint();
    raw.push_back(a);
    total += a;
  }
  // total is positive definite almost surely; whiten so the elements sum to I.
  Eigen::SelfAdjointEigenSolver<Matrix> es(total);
  if (es.eigenvalues().minCoeff() <= 1e-12) {
    return random_rank1_povm(d, n_outcomes, rng);
  }
  const Matrix w = es.eigenvectors() *
                   es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                   es.eigenvectors().adjoint();
  std::vector<Matrix> elements;
  for (const Matrix& a : raw) elements.push_back(w * a * w);
  return Povm(d, elements);
}

}  // namespace qcrb::models
