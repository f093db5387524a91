#include "qcrb/core.hpp"

#include <cmath>
#include <utility>

namespace qcrb {

QuantumState::QuantumState(Matrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 1) {
    throw DimensionError("QuantumState: matrix must be square and nonempty");
  }
  if (linalg::hermiticity_defect(rho_) > kHermitianTol) {
    throw NumericalError("QuantumState: matrix not Hermitian within tolerance");
  }
  const cxd tr = rho_.trace();
  if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kTraceTol) {
    throw NumericalError("QuantumState: trace " + std::to_string(tr.real()) +
                         " not 1 within tolerance");
  }
  const double min_eig = linalg::min_eigenvalue(rho_);
  if (min_eig < -kEigenvalueTol) {
    throw NumericalError("QuantumState: negative eigenvalue " + std::to_string(min_eig));
  }
  rho_ = linalg::hermitize(rho_);
}

double QuantumState::min_eigenvalue() const { return linalg::min_eigenvalue(rho_); }

bool QuantumState::is_near_pure(double tol) const {
  return std::abs((rho_ * rho_).trace().real() - 1.0) < tol;
}

Povm::Povm(int dim, std::vector<Matrix> elements)
    : dim_(dim), elements_(std::move(elements)) {
  if (dim_ < 1) throw DimensionError("Povm: dimension must be positive");
  if (elements_.empty()) throw DimensionError("Povm: needs at least one element");
  Matrix sum = Matrix::Zero(dim_, dim_);
  for (const Matrix& m : elements_) {
    if (m.rows() != dim_ || m.cols() != dim_) {
      throw DimensionError("Povm: element shape mismatch");
    }
    if (linalg::hermiticity_defect(m) > kHermitianTol) {
      throw NumericalError("Povm: element not Hermitian within tolerance");
    }
    if (linalg::min_eigenvalue(m) < -kEigenvalueTol) {
      throw NumericalError("Povm: element has a negative eigenvalue");
    }
    sum += m;
  }
  const double defect = (sum - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
  if (defect > kPovmSumTol) {
    throw NumericalError("Povm: elements sum to identity with defect " +
                         std::to_string(defect));
  }
}

Domain Domain::all(int dim) {
  Domain d;
  d.kind = Kind::All;
  d.dim = dim;
  return d;
}

Domain Domain::ball(int dim, double radius) {
  Domain d;
  d.kind = Kind::Ball;
  d.dim = dim;
  d.radius = radius;
  return d;
}

Domain Domain::box(RealVector lo, RealVector hi) {
  if (lo.size() != hi.size() || (hi - lo).minCoeff() <= 0.0) {
    throw DomainError("Domain::box: invalid bounds");
  }
  Domain d;
  d.kind = Kind::Box;
  d.dim = static_cast<int>(lo.size());
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  return d;
}

bool Domain::contains(const RealVector& theta) const {
  if (theta.size() != dim) return false;
  switch (kind) {
    case Kind::All:
      return true;
    case Kind::Ball:
      return theta.norm() < radius;
    case Kind::Box:
      return (theta.array() >= lo.array()).all() && (theta.array() <= hi.array()).all();
  }
  return false;
}

void Domain::bounding_box(RealVector& lo_out, RealVector& hi_out) const {
  switch (kind) {
    case Kind::All:
      lo_out = RealVector::Constant(dim, -1.0);
      hi_out = RealVector::Constant(dim, 1.0);
      return;
    case Kind::Ball:
      lo_out = RealVector::Constant(dim, -radius);
      hi_out = RealVector::Constant(dim, radius);
      return;
    case Kind::Box:
      lo_out = lo;
      hi_out = hi;
      return;
  }
}

ParametricModel::ParametricModel(int param_dim, Domain domain, StateFn state_fn,
                                 DerivFn deriv_fn, std::string name)
    : param_dim_(param_dim),
      domain_(std::move(domain)),
      state_fn_(std::move(state_fn)),
      deriv_fn_(std::move(deriv_fn)),
      name_(std::move(name)) {
  if (param_dim_ < 1) throw DimensionError("ParametricModel: param_dim must be >= 1");
  if (domain_.dim != param_dim_) {
    throw DimensionError("ParametricModel: domain dimension mismatch");
  }
  if (!state_fn_) throw DomainError("ParametricModel: missing state map");
}

QuantumState ParametricModel::state(const RealVector& theta) const {
  if (theta.size() != param_dim_) {
    throw DimensionError("ParametricModel::state: theta has wrong length");
  }
  if (!domain_.contains(theta)) {
    throw DomainError("ParametricModel::state: theta outside model domain");
  }
  return QuantumState(state_fn_(theta));
}

std::vector<Matrix> ParametricModel::derivatives(const RealVector& theta) const {
  if (theta.size() != param_dim_) {
    throw DimensionError("ParametricModel::derivatives: theta has wrong length");
  }
  if (!domain_.contains(theta)) {
    throw DomainError("ParametricModel::derivatives: theta outside model domain");
  }
  std::vector<Matrix> out;
  if (deriv_fn_) {
    out = deriv_fn_(theta);
    if (static_cast<int>(out.size()) != param_dim_) {
      throw DimensionError("ParametricModel::derivatives: wrong derivative count");
    }
  } else {
    out.reserve(param_dim_);
    for (int i = 0; i < param_dim_; ++i) {
      RealVector up = theta, dn = theta;
      up[i] += kFdStep;
      dn[i] -= kFdStep;
      // Shrink the step near the boundary so both evaluation points stay inside.
      double h = kFdStep;
      while ((!domain_.contains(up) || !domain_.contains(dn)) && h > 1e-9) {
        h *= 0.5;
        up = theta;
        dn = theta;
        up[i] += h;
        dn[i] -= h;
      }
      if (!domain_.contains(up) || !domain_.contains(dn)) {
        throw DomainError("ParametricModel::derivatives: no interior step at theta");
      }
      out.push_back((state_fn_(up) - state_fn_(dn)) / (2.0 * h));
    }
  }
  for (Matrix& m : out) m = linalg::hermitize(m);
  return out;
}

OutcomeDistribution born_distribution(const QuantumState& rho, const Povm& povm) {
  if (rho.dim() != povm.dim()) {
    throw DimensionError("born_distribution: state/POVM dimension mismatch");
  }
  OutcomeDistribution dist;
  dist.probabilities.reserve(povm.n_outcomes());
  double sum = 0.0;
  for (int x = 0; x < povm.n_outcomes(); ++x) {
    const cxd t = (rho.matrix() * povm.element(x)).trace();
    if (std::abs(t.imag()) > kImagProbTol) {
      throw NumericalError("born_distribution: probability has imaginary part " +
                           std::to_string(t.imag()));
    }
    double p = t.real();
    if (p < 0.0) {
      if (p < -kProbNegTol) {
        throw NumericalError("born_distribution: negative probability " +
                             std::to_string(p));
      }
      p = 0.0;
    }
    dist.probabilities.push_back(p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTol) {
    throw NumericalError("born_distribution: probabilities sum to " +
                         std::to_string(sum));
  }
  return dist;
}

QuantumState bloch_state(const Eigen::Vector3d& theta) {
  if (theta.norm() > 1.0 + 1e-12) {
    throw DomainError("bloch_state: ||theta|| exceeds 1");
  }
  Matrix rho(2, 2);
  rho(0, 0) = cxd(0.5 * (1.0 + theta[2]), 0.0);
  rho(1, 1) = cxd(0.5 * (1.0 - theta[2]), 0.0);
  rho(0, 1) = cxd(0.5 * theta[0], -0.5 * theta[1]);
  rho(1, 0) = cxd(0.5 * theta[0], 0.5 * theta[1]);
  return QuantumState(rho);
}

Eigen::Vector3d bloch_vector(const QuantumState& rho) {
  if (rho.dim() != 2) throw DimensionError("bloch_vector: qubit states only");
  const Matrix& r = rho.matrix();
  Eigen::Vector3d v;
  v[0] = 2.0 * r(1, 0).real();
  v[1] = 2.0 * r(1, 0).imag();
  v[2] = (r(0, 0) - r(1, 1)).real();
  return v;
}

double fidelity(const QuantumState& rho, const QuantumState& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionError("fidelity: dimension mismatch");
  }
  // For a rank-one state, sqrt(rho) sigma sqrt(rho) is rank one with
  // eigenvalue trace(rho sigma), so F = trace(rho sigma) exactly.  Taking
  // this branch avoids the eigensolver noise on the zero eigenvalues, which
  // otherwise dominates second differences of F around pure states.
  if (rho.is_near_pure(1e-11) || sigma.is_near_pure(1e-11)) {
    const double f = (rho.matrix() * sigma.matrix()).trace().real();
    return std::min(std::max(f, 0.0), 1.0);
  }
  const Matrix s = linalg::sqrt_psd(rho.matrix(), 1e-8);
  const Matrix inner = s * sigma.matrix() * s;
  const Matrix r = linalg::sqrt_psd(inner, 1e-8);
  double f = r.trace().real();
  f = f * f;
  if (f > 1.0 + 1e-8) {
    throw NumericalError("fidelity: value " + std::to_string(f) + " exceeds 1");
  }
  return std::min(std::max(f, 0.0), 1.0);
}

double bloch_fidelity(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  if (a.norm() > 1.0 + 1e-12 || b.norm() > 1.0 + 1e-12) {
    throw DomainError("bloch_fidelity: Bloch vector outside unit ball");
  }
  const double pa = std::max(0.0, 1.0 - a.squaredNorm());
  const double pb = std::max(0.0, 1.0 - b.squaredNorm());
  const double f = 0.5 * (1.0 + a.dot(b) + std::sqrt(pa * pb));
  return std::min(std::max(f, 0.0), 1.0);
}

std::vector<Matrix> hermitian_basis(int d) {
  if (d < 2) throw DimensionError("hermitian_basis: d must be >= 2");
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  basis.push_back(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Matrix sym = Matrix::Zero(d, d);
      sym(j, k) = inv_sqrt2;
      sym(k, j) = inv_sqrt2;
      basis.push_back(sym);
      Matrix asym = Matrix::Zero(d, d);
      asym(j, k) = cxd(0.0, -inv_sqrt2);
      asym(k, j) = cxd(0.0, inv_sqrt2);
      basis.push_back(asym);
    }
  }
  for (int l = 1; l < d; ++l) {
    Matrix diag = Matrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int i = 0; i < l; ++i) diag(i, i) = norm;
    diag(l, l) = -static_cast<double>(l) * norm;
    basis.push_back(diag);
  }
  return basis;
}

std::vector<Matrix> traceless_hermitian_basis(int d) {
  std::vector<Matrix> basis = hermitian_basis(d);
  basis.erase(basis.begin());
  return basis;
}

}  // namespace qcrb
