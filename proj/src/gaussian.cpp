#include "qcrb/gaussian.hpp"

#include <cmath>

namespace qcrb::gaussian {

SymplecticForm SymplecticForm::standard(int n_modes, int n_classical) {
  if (n_modes < 0 || n_classical < 0 || n_modes + n_classical == 0) {
    throw DimensionError("SymplecticForm: need at least one mode or classical slot");
  }
  SymplecticForm s;
  s.n_modes = n_modes;
  s.n_classical = n_classical;
  const int m = 2 * n_modes + n_classical;
  s.matrix = RealMatrix::Zero(m, m);
  for (int b = 0; b < n_modes; ++b) {
    s.matrix(2 * b, 2 * b + 1) = 1.0;
    s.matrix(2 * b + 1, 2 * b) = -1.0;
  }
  return s;
}

GaussianShift::GaussianShift(SymplecticForm s, RealMatrix v, RealMatrix l)
    : symplectic(std::move(s)), covariance(std::move(v)), mean_map(std::move(l)) {
  const int m = symplectic.dim();
  if (covariance.rows() != m || covariance.cols() != m) {
    throw DimensionError("GaussianShift: covariance dimension mismatch");
  }
  if (!linalg::is_symmetric(covariance, 1e-9)) {
    throw NumericalError("GaussianShift: covariance not symmetric");
  }
  covariance = 0.5 * (covariance + covariance.transpose().eval());
  if (mean_map.rows() != m || mean_map.cols() < 1 || mean_map.cols() > m) {
    throw DimensionError("GaussianShift: mean map must be m x k with 1 <= k <= m");
  }
  const UncertaintyReport rep = uncertainty_check(covariance, symplectic.matrix);
  if (!rep.valid) {
    throw UncertaintyError("GaussianShift: covariance violates V + iS/2 >= 0 (min eig " +
                           std::to_string(rep.min_eigenvalue) + ")");
  }
  Eigen::JacobiSVD<RealMatrix> svd(mean_map);
  const RealVector sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-12 * std::max(sv[0], 1.0)) {
    throw InfeasibleError("GaussianShift: mean map is rank deficient");
  }
}

UncertaintyReport uncertainty_check(const RealMatrix& v, const RealMatrix& s) {
  if (v.rows() != v.cols() || s.rows() != s.cols() || v.rows() != s.rows()) {
    throw DimensionError("uncertainty_check: dimension mismatch");
  }
  Matrix h = v.cast<cxd>() + cxd(0.0, 0.5) * s.cast<cxd>();
  UncertaintyReport rep;
  rep.min_eigenvalue = linalg::min_eigenvalue(h);
  rep.valid = rep.min_eigenvalue >= -1e-9;
  return rep;
}

UncertaintyReport uncertainty_check(const RealMatrix& v, const SymplecticForm& s) {
  return uncertainty_check(v, s.matrix);
}

SingleModeResult single_mode_minimax(const Eigen::Matrix2d& g, const Eigen::Matrix2d& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (g + g.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("single_mode_minimax: weight must be positive definite");
  }
  const double det_v = v.determinant();
  if (det_v < 0.25 - 1e-9 ||
      !uncertainty_check(v, SymplecticForm::standard(1, 0).matrix).valid) {
    throw UncertaintyError("single_mode_minimax: covariance violates det V >= 1/4");
  }
  const double g1 = es.eigenvalues()[0], g2 = es.eigenvalues()[1];
  const Eigen::Matrix2d o = es.eigenvectors();
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 0) = 0.5 * std::sqrt(g2 / g1);
  d(1, 1) = 0.5 * std::sqrt(g1 / g2);
  SingleModeResult res;
  res.y0 = o * d * o.transpose();
  res.risk = (g * v).trace() + std::sqrt(g.determinant());
  return res;
}

AbsSymplecticReport abs_symplectic_lemma(const RealMatrix& v, const RealMatrix& s) {
  if ((s + s.transpose().eval()).cwiseAbs().maxCoeff() > 1e-10) {
    throw NumericalError("abs_symplectic_lemma: S must be antisymmetric");
  }
  const UncertaintyReport check = uncertainty_check(v, s);
  if (!check.valid) {
    throw UncertaintyError("abs_symplectic_lemma: V + iS/2 not positive semidefinite");
  }
  AbsSymplecticReport rep;
  rep.lhs = v.trace();
  rep.rhs = 0.5 * linalg::trace_abs_real(s);
  return rep;
}

namespace {

struct YProblem {
  int m = 0, k = 0, q = 0;  // q = nullspace dimension of L^T
  RealMatrix y_part;        // k x m particular solution of yL = I
  RealMatrix null_basis;    // m x q, columns orthonormal, L^T N = 0
  RealMatrix g_sqrt, g_inv_sqrt;
};

YProblem build_y_problem(const GaussianShift& shift, const RealMatrix& g) {
  YProblem pb;
  pb.m = shift.dim();
  pb.k = shift.param_dim();
  if (g.rows() != pb.k || g.cols() != pb.k) {
    throw DimensionError("multimode_minimax: weight dimension != parameter dimension");
  }
  Eigen::JacobiSVD<RealMatrix> svd(shift.mean_map,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 1e-12 * std::max(sv[0], 1.0)) {
    throw InfeasibleError("multimode_minimax: mean map rank deficient");
  }
  // y L = I  <=>  L^T y^T = I; particular solution via the pseudoinverse.
  RealMatrix sigma_inv = RealMatrix::Zero(pb.k, pb.k);
  for (int i = 0; i < pb.k; ++i) sigma_inv(i, i) = 1.0 / sv[i];
  const RealMatrix pinv = svd.matrixV() * sigma_inv * svd.matrixU().leftCols(pb.k).transpose();
  // pinv is k x m with pinv * L = I.
  pb.y_part = pinv;
  pb.q = pb.m - pb.k;
  pb.null_basis = svd.matrixU().rightCols(pb.q);
  pb.g_sqrt = linalg::sqrt_psd_real(g, 1e-12);
  pb.g_inv_sqrt = linalg::inv_sqrt_pd_real(g, 1e-12);
  return pb;
}

RealMatrix y_from_vars(const YProblem& pb, const RealVector& xi) {
  RealMatrix y = pb.y_part;
  if (pb.q > 0) {
    for (int i = 0; i < pb.k; ++i) {
      y.row(i) += (pb.null_basis * xi.segment(static_cast<Eigen::Index>(i) * pb.q, pb.q))
                      .transpose();
    }
  }
  return y;
}

}  // namespace

MinimaxResult multimode_minimax(const GaussianShift& shift, const RealMatrix& g,
                                const SolverOptions& options) {
  YProblem pb = build_y_problem(shift, g);
  const RealMatrix& v = shift.covariance;
  const RealMatrix& s = shift.symplectic.matrix;

  auto objective = [&](const RealVector& xi, double eps, RealVector* grad) {
    const RealMatrix y = y_from_vars(pb, xi);
    const RealMatrix vy = y * v * y.transpose();
    const RealMatrix sy = y * s * y.transpose();
    const RealMatrix a = pb.g_sqrt * sy * pb.g_sqrt;
    const Matrix kmat = cxd(0.0, 1.0) * a.cast<cxd>();
    Eigen::SelfAdjointEigenSolver<Matrix> es(kmat);
    const RealVector beta = es.eigenvalues();
    double f2 = 0.0;
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
      f2 += std::sqrt(beta[i] * beta[i] + eps * eps);
    }
    const double f = (g * vy).trace() + 0.5 * f2;
    if (grad != nullptr) {
      RealVector phi(beta.size());
      for (Eigen::Index i = 0; i < beta.size(); ++i) {
        phi[i] = beta[i] / std::sqrt(beta[i] * beta[i] + eps * eps);
      }
      const Matrix pmat =
          es.eigenvectors() * phi.asDiagonal() * es.eigenvectors().adjoint();
      const RealMatrix im_p = pmat.imag();
      // d/dy of tr(G y V y^T) is 2 G y V; the trace-abs part contributes
      // -sqrt(G) Im(P) sqrt(G) y S (derived from d tr phi(K) = tr(phi'(K) dK)).
      const RealMatrix grad_y =
          2.0 * (g * y * v) - pb.g_sqrt * im_p * pb.g_sqrt * y * s;
      grad->resize(xi.size());
      for (int i = 0; i < pb.k; ++i) {
        grad->segment(static_cast<Eigen::Index>(i) * pb.q, pb.q) =
            pb.null_basis.transpose() * grad_y.row(i).transpose();
      }
    }
    return f;
  };

  MinimaxResult res;
  RealVector xi = RealVector::Zero(static_cast<Eigen::Index>(pb.k) * pb.q);
  if (pb.q > 0) {
    const int n_stages = static_cast<int>(options.smoothing_stages.size());
    const int budget = std::max(options.max_iterations / std::max(n_stages, 1), 100);
    bool final_converged = true;
    for (int st = 0; st < n_stages; ++st) {
      const double eps = options.smoothing_stages[st];
      auto fg = [&](const RealVector& x, RealVector* grad_out) {
        return objective(x, eps, grad_out);
      };
      const int stage_budget =
          (st + 1 == n_stages)
              ? std::max(options.max_iterations - res.convergence.iterations, budget)
              : budget;
      detail::DescentResult dr = detail::minimize_smooth(
          fg, xi, stage_budget, options.objective_tol, options.stall_window);
      xi = dr.x;
      res.convergence.iterations += dr.iterations;
      res.convergence.final_objective_delta = dr.final_delta;
      final_converged = dr.converged;
      if (dr.converged) ++res.convergence.stages_completed;
    }
    if (!final_converged) {
      throw ConvergenceError("multimode_minimax: no convergence after " +
                             std::to_string(res.convergence.iterations) +
                             " iterations");
    }
  } else {
    res.convergence.stages_completed = static_cast<int>(options.smoothing_stages.size());
  }
  res.convergence.converged = true;

  const RealMatrix y = y_from_vars(pb, xi);
  const RealMatrix vy = y * v * y.transpose();
  const RealMatrix sy = y * s * y.transpose();
  const RealMatrix a = pb.g_sqrt * sy * pb.g_sqrt;
  res.risk = (g * vy).trace() + 0.5 * linalg::trace_abs_real(a);
  res.measurement.y_coeffs = y;
  RealMatrix aux = 0.5 * pb.g_inv_sqrt * linalg::abs_real(a) * pb.g_inv_sqrt;
  res.measurement.aux_covariance = 0.5 * (aux + aux.transpose().eval());
  res.convergence.constraint_violation =
      (y * shift.mean_map - RealMatrix::Identity(pb.k, pb.k)).cwiseAbs().maxCoeff();
  if (res.convergence.constraint_violation > options.constraint_tol) {
    throw ConvergenceError("multimode_minimax: unbiasedness residual above tolerance");
  }
  return res;
}

RealMatrix sample_covariant_measurement(const GaussianShift& shift,
                                        const LinearMeasurement& measurement,
                                        const RealVector& h, int n_samples, Rng& rng) {
  const int k = shift.param_dim();
  if (measurement.y_coeffs.rows() != k || measurement.y_coeffs.cols() != shift.dim()) {
    throw DimensionError("sample_covariant_measurement: y_coeffs shape mismatch");
  }
  if (h.size() != k) {
    throw DimensionError("sample_covariant_measurement: h has wrong length");
  }
  if (n_samples < 1) throw DomainError("sample_covariant_measurement: n_samples >= 1");
  const RealMatrix residual =
      measurement.y_coeffs * shift.mean_map - RealMatrix::Identity(k, k);
  if (residual.cwiseAbs().maxCoeff() > 1e-8) {
    throw NumericalError("sample_covariant_measurement: measurement is biased");
  }
  const RealMatrix sy =
      measurement.y_coeffs * shift.symplectic.matrix * measurement.y_coeffs.transpose();
  if (!uncertainty_check(measurement.aux_covariance, sy).valid) {
    throw UncertaintyError(
        "sample_covariant_measurement: auxiliary covariance violates uncertainty");
  }
  const RealMatrix cov = measurement.y_coeffs * shift.covariance *
                             measurement.y_coeffs.transpose() +
                         measurement.aux_covariance;
  // Factor with eigenvalue clamping: optimal covariances sit on the boundary.
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (cov + cov.transpose().eval()));
  RealVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::sqrt(std::max(ev[i], 1e-12));
  const RealMatrix factor = es.eigenvectors() * ev.asDiagonal();
  RealMatrix out(n_samples, k);
  for (int i = 0; i < n_samples; ++i) {
    out.row(i) = (h + factor * rng.normal_vector(k)).transpose();
  }
  return out;
}

}  // namespace qcrb::gaussian
