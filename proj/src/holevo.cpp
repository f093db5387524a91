#include "qcrb/holevo.hpp"

#include <cmath>

#include "qcrb/fisher.hpp"

namespace qcrb::holevo {

WeightMatrix::WeightMatrix(RealMatrix m) : matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw DimensionError("WeightMatrix: must be square");
  }
  if (!linalg::is_symmetric(matrix, 1e-10)) {
    throw NumericalError("WeightMatrix: not symmetric within tolerance");
  }
  matrix = 0.5 * (matrix + matrix.transpose().eval());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-10) {
    throw NumericalError("WeightMatrix: not positive definite (min eig " +
                         std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
}

Matrix z_matrix(const ParametricModel& model, const RealVector& theta,
                std::span<const Matrix> xs) {
  const QuantumState rho = model.state(theta);
  const int p = static_cast<int>(xs.size());
  const int d = rho.dim();
  for (const Matrix& x : xs) {
    if (x.rows() != d || x.cols() != d) {
      throw DimensionError("z_matrix: observable shape mismatch");
    }
    if (linalg::hermiticity_defect(x) > 1e-8) {
      throw NumericalError("z_matrix: observable not Hermitian");
    }
  }
  Matrix z(p, p);
  std::vector<Matrix> t(p);
  for (int i = 0; i < p; ++i) t[i] = rho.matrix() * xs[i];
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      z(i, j) = t[i].cwiseProduct(xs[j].transpose()).sum();
      if (j > i) z(j, i) = std::conj(z(i, j));
    }
  }
  return z;
}

namespace {

struct Problem {
  int d = 0, p = 0, nb = 0, q = 0;
  Matrix rho;
  std::vector<Matrix> basis;   // traceless orthonormal
  std::vector<Matrix> derivs;
  RealMatrix constraint;       // p x nb, row i = tr(d_i rho B_a)
  RealMatrix x_part;           // nb x p particular solutions
  RealMatrix null_basis;       // nb x q
  RealMatrix g_sqrt, g_inv_sqrt;
  Matrix g_sqrt_c;
};

Problem build_problem(const ParametricModel& model, const RealVector& theta,
                      const WeightMatrix& weight) {
  Problem pb;
  const QuantumState rho = model.state(theta);
  pb.rho = rho.matrix();
  pb.d = rho.dim();
  pb.p = model.param_dim();
  if (weight.dim() != pb.p) {
    throw DimensionError("holevo_bound: weight dimension != param dimension");
  }
  pb.derivs = model.derivatives(theta);
  pb.basis = traceless_hermitian_basis(pb.d);
  pb.nb = static_cast<int>(pb.basis.size());

  pb.constraint.resize(pb.p, pb.nb);
  for (int i = 0; i < pb.p; ++i)
    for (int a = 0; a < pb.nb; ++a)
      pb.constraint(i, a) = (pb.derivs[i] * pb.basis[a]).trace().real();

  Eigen::JacobiSVD<RealMatrix> svd(pb.constraint,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector sv = svd.singularValues();
  const double cutoff =
      std::max(pb.p, pb.nb) * 1e-13 * std::max(sv.size() > 0 ? sv[0] : 0.0, 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  if (rank < pb.p) {
    throw InfeasibleError(
        "holevo_bound: derivative constraints are rank-deficient; no locally "
        "unbiased observables exist");
  }
  RealMatrix sigma_pinv = RealMatrix::Zero(pb.nb, pb.p);
  for (int i = 0; i < rank; ++i) sigma_pinv(i, i) = 1.0 / sv[i];
  pb.x_part = svd.matrixV() * sigma_pinv * svd.matrixU().transpose();
  pb.q = pb.nb - rank;
  pb.null_basis = svd.matrixV().rightCols(pb.q);

  pb.g_sqrt = linalg::sqrt_psd_real(weight.matrix, 1e-12);
  pb.g_inv_sqrt = linalg::inv_sqrt_pd_real(weight.matrix, 1e-12);
  pb.g_sqrt_c = pb.g_sqrt.cast<cxd>();
  return pb;
}

struct Evaluation {
  double value = 0.0;
  Matrix z_centered;
  RealMatrix re_m, im_m;  // sqrt(G) Z sqrt(G) split into parts
  std::vector<Matrix> x_traceless;
  RealVector identity_shift;  // m_j = tr(rho X_j)
};

/// Coefficients (nb x p) -> objective pieces at smoothing eps; fills the
/// coefficient-space gradient when grad != nullptr.
Evaluation evaluate(const Problem& pb, const RealMatrix& coeffs, double eps,
                    RealMatrix* grad) {
  Evaluation ev;
  const int p = pb.p, d = pb.d, nb = pb.nb;
  ev.x_traceless.assign(p, Matrix::Zero(d, d));
  for (int j = 0; j < p; ++j) {
    for (int a = 0; a < nb; ++a) {
      if (coeffs(a, j) != 0.0) ev.x_traceless[j] += coeffs(a, j) * pb.basis[a];
    }
  }
  std::vector<Matrix> t(p);
  ev.identity_shift.resize(p);
  for (int i = 0; i < p; ++i) {
    t[i] = pb.rho * ev.x_traceless[i];
    ev.identity_shift[i] = t[i].trace().real();
  }
  Matrix z(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      z(i, j) = t[i].cwiseProduct(ev.x_traceless[j].transpose()).sum();
      if (j > i) z(j, i) = std::conj(z(i, j));
    }
  const RealVector& m = ev.identity_shift;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) z(i, j) -= m[i] * m[j];
  ev.z_centered = z;

  const Matrix mg = pb.g_sqrt_c * z * pb.g_sqrt_c;
  ev.re_m = mg.real();
  ev.re_m = 0.5 * (ev.re_m + ev.re_m.transpose().eval());
  ev.im_m = mg.imag();
  ev.im_m = 0.5 * (ev.im_m - ev.im_m.transpose().eval());

  const Matrix k = cxd(0.0, 1.0) * ev.im_m.cast<cxd>();
  Eigen::SelfAdjointEigenSolver<Matrix> es(k);
  const RealVector beta = es.eigenvalues();
  double f2 = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    f2 += std::sqrt(beta[i] * beta[i] + eps * eps);
  }
  ev.value = ev.re_m.trace() + f2;

  if (grad != nullptr) {
    RealVector phi(beta.size());
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
      phi[i] = beta[i] / std::sqrt(beta[i] * beta[i] + eps * eps);
    }
    const Matrix pmat =
        es.eigenvectors() * phi.asDiagonal() * es.eigenvectors().adjoint();
    const Matrix omega =
        Matrix::Identity(p, p) + 0.5 * (pmat - pmat.transpose().eval());
    const Matrix w = pb.g_sqrt_c * omega * pb.g_sqrt_c;

    grad->resize(nb, p);
    for (int k2 = 0; k2 < p; ++k2) {
      Matrix ek = Matrix::Zero(d, d);
      cxd sk(0.0, 0.0);
      for (int i = 0; i < p; ++i) {
        ek += w(i, k2) * t[i].adjoint();  // X_i rho
        ek += w(k2, i) * t[i];            // rho X_i
        sk += w(i, k2) * m[i] + w(k2, i) * m[i];
      }
      ek -= sk * pb.rho;
      for (int a = 0; a < nb; ++a) {
        (*grad)(a, k2) = pb.basis[a].cwiseProduct(ek.transpose()).sum().real();
      }
    }
  }
  return ev;
}

RealMatrix coeffs_from_vars(const Problem& pb, const RealVector& xi) {
  RealMatrix coeffs = pb.x_part;
  if (pb.q > 0) {
    for (int j = 0; j < pb.p; ++j) {
      coeffs.col(j) += pb.null_basis * xi.segment(j * pb.q, pb.q);
    }
  }
  return coeffs;
}

RealVector warm_start(const Problem& pb, const ParametricModel& model,
                      const RealVector& theta) {
  RealVector xi = RealVector::Zero(static_cast<Eigen::Index>(pb.p) * pb.q);
  if (linalg::min_eigenvalue(pb.rho) <= 1e-8) return xi;
  std::vector<Matrix> lambdas;
  try {
    lambdas = fisher::sld(model, theta);
  } catch (const Error&) {
    return xi;
  }
  const int p = pb.p;
  RealMatrix h(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      h(i, j) = (pb.rho * lambdas[i] * lambdas[j]).trace().real();
  h = 0.5 * (h + h.transpose().eval());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
  if (es.eigenvalues().minCoeff() < 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff())) {
    return xi;
  }
  const RealMatrix h_inv = es.operatorInverseSqrt() * es.operatorInverseSqrt();
  RealMatrix coeffs(pb.nb, p);
  for (int j = 0; j < p; ++j) {
    Matrix xj = Matrix::Zero(pb.d, pb.d);
    for (int k = 0; k < p; ++k) xj += h_inv(j, k) * lambdas[k];
    for (int a = 0; a < pb.nb; ++a) {
      coeffs(a, j) = (pb.basis[a] * xj).trace().real();
    }
  }
  const double residual = (pb.constraint * coeffs - RealMatrix::Identity(p, p))
                              .cwiseAbs()
                              .maxCoeff();
  if (residual > 1e-8) return xi;
  for (int j = 0; j < p; ++j) {
    xi.segment(static_cast<Eigen::Index>(j) * pb.q, pb.q) =
        pb.null_basis.transpose() * (coeffs.col(j) - pb.x_part.col(j));
  }
  return xi;
}

}  // namespace

HolevoSolution holevo_bound(const ParametricModel& model, const RealVector& theta,
                            const WeightMatrix& weight, const SolverOptions& options) {
  Problem pb = build_problem(model, theta, weight);
  HolevoSolution sol;

  RealVector xi = warm_start(pb, model, theta);
  if (pb.q > 0) {
    const int n_stages = static_cast<int>(options.smoothing_stages.size());
    const int budget = std::max(options.max_iterations / std::max(n_stages, 1), 100);
    bool final_converged = true;
    for (int s = 0; s < n_stages; ++s) {
      const double eps = options.smoothing_stages[s];
      auto fg = [&](const RealVector& x, RealVector* g) {
        RealMatrix grad_coeffs;
        const Evaluation ev =
            evaluate(pb, coeffs_from_vars(pb, x), eps, g ? &grad_coeffs : nullptr);
        if (g != nullptr) {
          g->resize(x.size());
          for (int j = 0; j < pb.p; ++j) {
            g->segment(static_cast<Eigen::Index>(j) * pb.q, pb.q) =
                pb.null_basis.transpose() * grad_coeffs.col(j);
          }
        }
        return ev.value;
      };
      const int stage_budget =
          (s + 1 == n_stages) ? std::max(options.max_iterations - sol.convergence.iterations,
                                         budget)
                              : budget;
      detail::DescentResult dr = detail::minimize_smooth(
          fg, xi, stage_budget, options.objective_tol, options.stall_window);
      xi = dr.x;
      sol.convergence.iterations += dr.iterations;
      sol.convergence.final_objective_delta = dr.final_delta;
      final_converged = dr.converged;
      if (dr.converged) ++sol.convergence.stages_completed;
    }
    if (!final_converged) {
      throw ConvergenceError(
          "holevo_bound: no convergence after " +
          std::to_string(sol.convergence.iterations) + " iterations (last window delta " +
          std::to_string(sol.convergence.final_objective_delta) + ")");
    }
    sol.convergence.converged = true;
  } else {
    sol.convergence.converged = true;
    sol.convergence.stages_completed =
        static_cast<int>(options.smoothing_stages.size());
  }

  // Exact (unsmoothed) objective and certificates at the final point.
  const RealMatrix coeffs = coeffs_from_vars(pb, xi);
  const Evaluation ev = evaluate(pb, coeffs, 0.0, nullptr);
  sol.value = std::max(ev.value, 0.0);
  sol.z = ev.z_centered;
  sol.v_opt =
      pb.g_inv_sqrt * (ev.re_m + linalg::abs_real(ev.im_m)) * pb.g_inv_sqrt;
  sol.v_opt = 0.5 * (sol.v_opt + sol.v_opt.transpose().eval());
  sol.dual_k = sol.v_opt * weight.matrix * sol.v_opt;
  sol.dual_k = 0.5 * (sol.dual_k + sol.dual_k.transpose().eval());
  sol.dual_value = sol.value;

  sol.x_opt.reserve(pb.p);
  const Matrix eye = Matrix::Identity(pb.d, pb.d);
  for (int j = 0; j < pb.p; ++j) {
    sol.x_opt.push_back(ev.x_traceless[j] - ev.identity_shift[j] * eye);
  }
  double violation = 0.0;
  for (int i = 0; i < pb.p; ++i)
    for (int j = 0; j < pb.p; ++j) {
      const double c = (pb.derivs[i] * sol.x_opt[j]).trace().real();
      violation = std::max(violation, std::abs(c - (i == j ? 1.0 : 0.0)));
    }
  sol.convergence.constraint_violation = violation;
  if (violation > options.constraint_tol) {
    throw ConvergenceError("holevo_bound: constraint residual " +
                           std::to_string(violation) + " above tolerance");
  }
  return sol;
}

std::pair<WeightMatrix, double> dual_from_primal(const HolevoSolution& solution,
                                                 const WeightMatrix& weight) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(solution.v_opt, Eigen::EigenvaluesOnly);
  const double min_abs = es.eigenvalues().cwiseAbs().minCoeff();
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (min_abs <= 1e-10 * scale) {
    throw SingularError("dual_from_primal: optimal covariance is singular");
  }
  return {WeightMatrix(solution.v_opt * weight.matrix * solution.v_opt),
          solution.value};
}

DualBoundReport verify_dual_bound(const ParametricModel& model, const RealVector& theta,
                                  const RealMatrix& k0, double cap,
                                  std::span<const Povm> povms) {
  if (povms.empty()) throw DomainError("verify_dual_bound: no POVMs supplied");
  DualBoundReport report;
  report.cap = cap;
  report.n_checked = povms.size();
  report.max_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < povms.size(); ++i) {
    const fisher::InfoMatrix info = fisher::fisher_info(model, theta, povms[i]);
    const double v = (k0 * info.matrix).trace();
    if (v > report.max_value) {
      report.max_value = v;
      report.argmax = i;
    }
  }
  report.holds = report.max_value <= cap + report.tolerance;
  return report;
}

SupportStructureReport support_structure_check(const ParametricModel& model,
                                               const RealVector& theta,
                                               std::span<const WeightMatrix> weights,
                                               const SolverOptions& options) {
  if (weights.size() < 2) {
    throw DomainError("support_structure_check: need at least two weights");
  }
  SupportStructureReport report;
  report.n_weights = weights.size();
  std::vector<RealMatrix> vs;
  vs.reserve(weights.size());
  for (const WeightMatrix& g : weights) {
    HolevoSolution sol = holevo_bound(model, theta, g, options);
    report.values.push_back(sol.value);
    vs.push_back(sol.v_opt);
  }
  double worst = std::numeric_limits<double>::infinity();
  auto slack_against_all = [&](const RealMatrix& v) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double slack = (weights[k].matrix * v).trace() - report.values[k];
      worst = std::min(worst, slack);
    }
  };
  for (const RealMatrix& v : vs) slack_against_all(v);
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (std::size_t b = a + 1; b < vs.size(); ++b)
      slack_against_all(0.5 * (vs[a] + vs[b]));
  report.worst_slack = worst;
  report.ok = worst >= -1e-5;
  return report;
}

}  // namespace qcrb::holevo
