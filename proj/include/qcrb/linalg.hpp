#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qcrb {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace linalg {

/// (A + A^dagger)/2
Matrix hermitize(const Matrix& a);

/// Largest |entry| of A - A^dagger; 0 for exactly Hermitian input.
double hermiticity_defect(const Matrix& a);

/// Smallest eigenvalue of a (nearly) Hermitian matrix.
double min_eigenvalue(const Matrix& a);

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues in [-neg_tol, 0) are clamped to zero; below -neg_tol throws NumericalError.
Matrix sqrt_psd(const Matrix& a, double neg_tol = 1e-10);

/// Same for real symmetric input.
RealMatrix sqrt_psd_real(const RealMatrix& a, double neg_tol = 1e-10);

/// Inverse square root of a real symmetric positive definite matrix.
/// Throws SingularError when the smallest eigenvalue is <= min_eig.
RealMatrix inv_sqrt_pd_real(const RealMatrix& a, double min_eig = 1e-12);

/// |A| = (A^T A)^{1/2} for a real matrix (used on antisymmetric inputs).
RealMatrix abs_real(const RealMatrix& a);

/// Trace of |A| for real antisymmetric A (sum of singular values).
double trace_abs_real(const RealMatrix& a);

/// Kronecker product.
Matrix kron(const Matrix& a, const Matrix& b);

/// True when max |A - A^T| entry is below tol.
bool is_symmetric(const RealMatrix& a, double tol = 1e-10);

/// Frobenius distance.
double frob_dist(const Matrix& a, const Matrix& b);

}  // namespace linalg
}  // namespace qcrb
