#include "qcrb/linalg.hpp"

#include <cmath>

#include "qcrb/errors.hpp"

namespace qcrb::linalg {

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint().eval()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix sqrt_psd(const Matrix& a, double neg_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a));
  RealVector ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -neg_tol * scale) {
      throw NumericalError("sqrt_psd: eigenvalue " + std::to_string(ev[i]) +
                           " below tolerance");
    }
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

RealMatrix sqrt_psd_real(const RealMatrix& a, double neg_tol) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (a + a.transpose()));
  RealVector ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -neg_tol * scale) {
      throw NumericalError("sqrt_psd_real: eigenvalue " + std::to_string(ev[i]) +
                           " below tolerance");
    }
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

RealMatrix inv_sqrt_pd_real(const RealMatrix& a, double min_eig) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (a + a.transpose()));
  RealVector ev = es.eigenvalues();
  if (ev.minCoeff() <= min_eig) {
    throw SingularError("inv_sqrt_pd_real: matrix not positive definite (min eig " +
                        std::to_string(ev.minCoeff()) + ")");
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = 1.0 / std::sqrt(ev[i]);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

RealMatrix abs_real(const RealMatrix& a) {
  return sqrt_psd_real(a.transpose() * a, 1e-9);
}

double trace_abs_real(const RealMatrix& a) {
  Eigen::JacobiSVD<RealMatrix> svd(a);
  return svd.singularValues().sum();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_symmetric(const RealMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.transpose().eval()).cwiseAbs().maxCoeff() <= tol;
}

double frob_dist(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

}  // namespace qcrb::linalg
