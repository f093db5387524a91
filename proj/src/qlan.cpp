#include "qcrb/qlan.hpp"

#include <algorithm>
#include <cmath>

#include "qcrb/rng.hpp"

namespace qcrb::qlan {
namespace {

RealVector checked_spectrum(const QuantumState& rho0) {
  const Matrix& r = rho0.matrix();
  const int d = rho0.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && std::abs(r(i, j)) > 1e-10) {
        throw DegeneracyError("clt_basis: reference state must be diagonal");
      }
  RealVector mu(d);
  for (int i = 0; i < d; ++i) mu[i] = r(i, i).real();
  for (int i = 0; i < d; ++i) {
    if (mu[i] <= 0.0) {
      throw DegeneracyError("clt_basis: eigenvalues must be strictly positive");
    }
    if (i > 0 && mu[i - 1] - mu[i] <= kEigGapFloor) {
      throw DegeneracyError("clt_basis: eigenvalues must decrease with gaps > 1e-6");
    }
  }
  return mu;
}

void check_mu(const RealVector& mu) {
  const int d = static_cast<int>(mu.size());
  if (d < 2) throw DimensionError("qlan: dimension must be >= 2");
  for (int i = 0; i < d; ++i) {
    if (mu[i] <= 0.0) throw DegeneracyError("qlan: eigenvalues must be positive");
    if (i > 0 && mu[i - 1] - mu[i] <= kEigGapFloor) {
      throw DegeneracyError("qlan: eigenvalue gaps must exceed 1e-6");
    }
  }
  if (std::abs(mu.sum() - 1.0) > 1e-10) {
    throw NumericalError("qlan: eigenvalues must sum to 1");
  }
}

}  // namespace

LocalParams LocalParams::zero(int d) {
  LocalParams h;
  h.u = RealVector::Zero(d - 1);
  h.zeta = Eigen::VectorXcd::Zero(d * (d - 1) / 2);
  return h;
}

LocalModel::LocalModel(RealVector mu_in, LocalParams h_in, long n)
    : mu(std::move(mu_in)), h(std::move(h_in)), n_copies(n) {
  check_mu(mu);
  const int d = dim();
  if (h.u.size() != d - 1 || h.zeta.size() != d * (d - 1) / 2) {
    throw DimensionError("LocalModel: local parameter has wrong shape");
  }
  if (n_copies < 1) throw DomainError("LocalModel: n_copies must be >= 1");
}

CltBasis clt_basis(const QuantumState& rho0) {
  const RealVector mu = checked_spectrum(rho0);
  const int d = rho0.dim();
  CltBasis basis;
  basis.d = d;
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const double denom = std::sqrt(2.0 * (mu[j] - mu[k]));
      Matrix q = Matrix::Zero(d, d);
      q(j, k) = 1.0 / denom;
      q(k, j) = 1.0 / denom;
      basis.operators.push_back(q);
      basis.labels.push_back("Q" + std::to_string(j + 1) + std::to_string(k + 1));
      Matrix p = Matrix::Zero(d, d);
      p(k, j) = cxd(0.0, 1.0 / denom);
      p(j, k) = cxd(0.0, -1.0 / denom);
      basis.operators.push_back(p);
      basis.labels.push_back("P" + std::to_string(j + 1) + std::to_string(k + 1));
    }
  }
  for (int i = 0; i + 1 < d; ++i) {
    Matrix c = Matrix::Zero(d, d);
    c(i, i) = 1.0;
    c -= mu[i] * Matrix::Identity(d, d);
    basis.operators.push_back(c);
    basis.labels.push_back("C" + std::to_string(i + 1));
  }
  return basis;
}

Matrix local_state_matrix(const RealVector& mu, const LocalParams& h) {
  check_mu(mu);
  const int d = static_cast<int>(mu.size());
  if (h.u.size() != d - 1 || h.zeta.size() != d * (d - 1) / 2) {
    throw DimensionError("local_state_matrix: parameter shape mismatch");
  }
  Matrix rho = Matrix::Zero(d, d);
  double tail = mu[d - 1];
  for (int i = 0; i + 1 < d; ++i) {
    rho(i, i) = mu[i] + h.u[i];
    tail -= h.u[i];
  }
  rho(d - 1, d - 1) = tail;
  int idx = 0;
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k, ++idx) {
      rho(k, j) = h.zeta[idx];
      rho(j, k) = std::conj(h.zeta[idx]);
    }
  }
  return rho;
}

QuantumState local_state(const LocalModel& model) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(model.n_copies));
  LocalParams scaled;
  scaled.u = model.h.u * scale;
  scaled.zeta = model.h.zeta * scale;
  try {
    return QuantumState(local_state_matrix(model.mu, scaled));
  } catch (const NumericalError& e) {
    throw DomainError(std::string("local_state: h/sqrt(N) leaves the state space (") +
                      e.what() + ")");
  }
}

Matrix quantum_clt_covariance(const QuantumState& rho0, const CltBasis& basis) {
  const int m = static_cast<int>(basis.operators.size());
  if (basis.d != rho0.dim() || m != basis.d * basis.d - 1) {
    throw DimensionError("quantum_clt_covariance: basis/state mismatch");
  }
  Matrix cov(m, m);
  std::vector<Matrix> t(m);
  for (int a = 0; a < m; ++a) t[a] = rho0.matrix() * basis.operators[a];
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      cov(a, b) = t[a].cwiseProduct(basis.operators[b].transpose()).sum();
      if (b > a) cov(b, a) = std::conj(cov(a, b));
    }
  return cov;
}

LimitGaussian limit_model(const QuantumState& rho0) {
  const RealVector mu = checked_spectrum(rho0);
  const int d = rho0.dim();
  const CltBasis basis = clt_basis(rho0);
  const int m = d * d - 1;
  const int n_pairs = basis.n_pairs();

  LimitGaussian lim;
  lim.classical_cov.resize(d - 1, d - 1);
  for (int i = 0; i + 1 < d; ++i)
    for (int j = 0; j + 1 < d; ++j) {
      lim.classical_cov(i, j) = (i == j ? mu[i] : 0.0) - mu[i] * mu[j];
    }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      lim.pair_variances.push_back((mu[j] + mu[k]) / (2.0 * (mu[j] - mu[k])));
      lim.pair_variances_display.push_back(1.0 / (2.0 * (mu[j] - mu[k])));
    }

  // Mean map: columns ordered (u_1..u_{d-1}, Re zeta_1, Im zeta_1, ...),
  // rows in basis order (Q1, P1, ..., C_1..C_{d-1}).
  lim.mean_map = RealMatrix::Zero(m, m);
  int pair = 0;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k, ++pair) {
      const double coeff = 1.0 / std::sqrt(0.5 * (mu[j] - mu[k]));
      lim.mean_map(2 * pair, d - 1 + 2 * pair) = coeff;      // Q row <- Re zeta
      lim.mean_map(2 * pair + 1, d - 1 + 2 * pair + 1) = coeff;  // P row <- Im zeta
    }
  for (int i = 0; i + 1 < d; ++i) lim.mean_map(2 * n_pairs + i, i) = 1.0;

  const Matrix cov = quantum_clt_covariance(rho0, basis);
  lim.covariance = cov.real();
  lim.covariance = 0.5 * (lim.covariance + lim.covariance.transpose().eval());
  lim.symplectic = gaussian::SymplecticForm::standard(n_pairs, d - 1);
  const RealMatrix s_emp = 2.0 * cov.imag();
  if ((s_emp - lim.symplectic.matrix).cwiseAbs().maxCoeff() > 1e-10) {
    throw NumericalError("limit_model: symplectic form deviates from canonical blocks");
  }
  return lim;
}

RealMatrix l_map(const ParametricModel& submodel, const RealVector& theta0,
                 const QuantumState& rho0, const CltBasis& basis) {
  const QuantumState at0 = submodel.state(theta0);
  if (linalg::frob_dist(at0.matrix(), rho0.matrix()) > 1e-8) {
    throw DomainError("l_map: submodel does not pass through the reference state");
  }
  const std::vector<Matrix> derivs = submodel.derivatives(theta0);
  const int k = submodel.param_dim();
  const int m = static_cast<int>(basis.operators.size());
  RealMatrix l(k, m);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < m; ++a) {
      l(i, a) = (derivs[i] * basis.operators[a]).trace().real();
    }
  return l;
}

ParametricModel local_chart_model(const RealVector& mu) {
  check_mu(mu);
  const int d = static_cast<int>(mu.size());
  const int p = d * d - 1;
  auto unpack = [d](const RealVector& t) {
    LocalParams h;
    h.u = t.head(d - 1);
    h.zeta.resize(d * (d - 1) / 2);
    for (int idx = 0; idx < h.zeta.size(); ++idx) {
      h.zeta[idx] = cxd(t[d - 1 + 2 * idx], t[d - 1 + 2 * idx + 1]);
    }
    return h;
  };
  RealVector mu_copy = mu;
  auto state_fn = [mu_copy, unpack](const RealVector& t) {
    return local_state_matrix(mu_copy, unpack(t));
  };
  std::vector<Matrix> derivs;
  for (int i = 0; i + 1 < d; ++i) {
    Matrix dm = Matrix::Zero(d, d);
    dm(i, i) = 1.0;
    dm(d - 1, d - 1) = -1.0;
    derivs.push_back(dm);
  }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Matrix re = Matrix::Zero(d, d);
      re(k, j) = 1.0;
      re(j, k) = 1.0;
      derivs.push_back(re);
      Matrix im = Matrix::Zero(d, d);
      im(k, j) = cxd(0.0, 1.0);
      im(j, k) = cxd(0.0, -1.0);
      derivs.push_back(im);
    }
  auto deriv_fn = [derivs](const RealVector&) { return derivs; };
  // Radius keeping the diagonal perturbation safely inside the simplex.
  double room = mu[d - 1];
  for (int i = 1; i < d; ++i) room = std::min(room, mu[i - 1] - mu[i]);
  return ParametricModel(p, Domain::ball(p, 0.45 * room), state_fn, deriv_fn,
                         "local_chart");
}

gaussian::GaussianShift limit_shift(const QuantumState& rho0, const RealMatrix& l) {
  const LimitGaussian lim = limit_model(rho0);
  const int m = static_cast<int>(lim.covariance.rows());
  if (l.cols() != m) {
    throw DimensionError("limit_shift: L must have one column per basis operator");
  }
  return gaussian::GaussianShift(lim.symplectic, lim.covariance, l.transpose());
}

namespace {

struct ObservableSpectrum {
  std::vector<double> values;
  std::vector<double> probs;  // under the finite-N local state
};

ObservableSpectrum spectrum_under(const Matrix& x, const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  const RealVector ev = es.eigenvalues();
  const Matrix& u = es.eigenvectors();
  ObservableSpectrum sp;
  int i = 0;
  const int d = static_cast<int>(ev.size());
  while (i < d) {
    int j = i;
    double p = 0.0;
    while (j < d && ev[j] - ev[i] < 1e-9) {
      p += (u.col(j).adjoint() * rho * u.col(j))(0, 0).real();
      ++j;
    }
    sp.values.push_back(ev[i]);
    sp.probs.push_back(std::max(p, 0.0));
    i = j;
  }
  return sp;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::vector<CltObservableReport> clt_empirical_check(const LocalModel& model, int reps,
                                                     std::uint64_t seed) {
  if (model.n_copies < 100) throw DomainError("clt_empirical_check: N must be >= 100");
  if (reps < 1000) throw DomainError("clt_empirical_check: reps must be >= 1000");
  const int d = model.dim();
  Matrix rho0_mat = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) rho0_mat(i, i) = model.mu[i];
  const QuantumState rho0(rho0_mat);
  const CltBasis basis = clt_basis(rho0);
  const LimitGaussian lim = limit_model(rho0);
  const QuantumState rho_local = local_state(model);
  const long n = model.n_copies;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  RealVector h_packed(d * d - 1);
  h_packed.head(d - 1) = model.h.u;
  for (int idx = 0; idx < model.h.zeta.size(); ++idx) {
    h_packed[d - 1 + 2 * idx] = model.h.zeta[idx].real();
    h_packed[d - 1 + 2 * idx + 1] = model.h.zeta[idx].imag();
  }
  const RealVector predicted_means = lim.mean_map * h_packed;

  std::vector<CltObservableReport> out;
  const int m = static_cast<int>(basis.operators.size());
  std::vector<double> samples(reps);
  for (int a = 0; a < m; ++a) {
    CltObservableReport rep;
    rep.label = basis.labels[a];
    rep.predicted_mean = predicted_means[a];
    rep.predicted_var =
        (rho0.matrix() * basis.operators[a] * basis.operators[a]).trace().real();
    const int n_pairs = basis.n_pairs();
    rep.predicted_var_display = (a < 2 * n_pairs) ? lim.pair_variances_display[a / 2]
                                                  : rep.predicted_var;
    const ObservableSpectrum sp = spectrum_under(basis.operators[a], rho_local.matrix());

    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      Rng rng(seed, static_cast<std::uint64_t>(a) * reps + r);
      const std::vector<long> counts = rng.multinomial(n, sp.probs);
      double total = 0.0;
      for (std::size_t v = 0; v < counts.size(); ++v) {
        total += static_cast<double>(counts[v]) * sp.values[v];
      }
      const double value = total / sqrt_n;
      samples[r] = value;
      sum += value;
      sum_sq += value * value;
    }
    rep.empirical_mean = sum / reps;
    rep.empirical_var =
        (sum_sq - sum * sum / reps) / (reps - 1);
    std::sort(samples.begin(), samples.end());
    const double sd = std::sqrt(rep.predicted_var);
    double ks = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double f = normal_cdf((samples[r] - rep.predicted_mean) / sd);
      ks = std::max(ks, std::abs(f - static_cast<double>(r + 1) / reps));
      ks = std::max(ks, std::abs(f - static_cast<double>(r) / reps));
    }
    rep.ks_distance = ks;
    rep.var_match = std::abs(rep.empirical_var - rep.predicted_var) <=
                            std::abs(rep.empirical_var - rep.predicted_var_display)
                        ? "general"
                        : "display";
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace qcrb::qlan
