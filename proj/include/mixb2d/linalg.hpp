#ifndef MIXB2D_LINALG_HPP
#define MIXB2D_LINALG_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "mixb2d/errors.hpp"

namespace mixb2d {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest entry count a kron result may have (guards accidental blow-ups).
inline constexpr std::int64_t kKronEntryCap = 100'000'000;

/// Throws DimensionError if any entry of m is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// Kronecker product: block (i,j) of the result is a(i,j) * b.
Matrix kron(const Matrix& a, const Matrix& b, std::int64_t entry_cap = kKronEntryCap);

/// Column-stacking vectorization, so that vec(A*X*B) = kron(B^T, A) * vec(X).
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Index rows, Index cols);

/// Cholesky factor of a symmetric positive definite matrix.
///
/// Validates symmetry (1e-10 relative) on construction and reports the
/// failing pivot if the matrix is not positive definite. solve() applies one
/// step of iterative refinement so A * solve(A, b) reproduces b to ~1e-9
/// relative even near condition 1e8.
class SpdFactor {
 public:
  explicit SpdFactor(const Matrix& a);

  Index dim() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }

  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;
  double logdet() const;

 private:
  Matrix lower_;     // L with A = L * L^T
  Matrix original_;  // kept for the refinement step
};

SpdFactor spd_factorize(const Matrix& a);
Matrix spd_solve(const SpdFactor& f, const Matrix& b);
double spd_logdet(const SpdFactor& f);

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // columns aligned with values
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Solves gl * Q * gr + sigma2 * Q = y for Q, where gl (r x r) and gr (c x c)
/// are symmetric PSD and sigma2 > 0.
///
/// Uses eigendecompositions gl = U D U^T, gr = V E V^T and elementwise
/// division by (d_i * e_j + sigma2); eigenvalues below 1e-12 of the largest
/// are clamped to zero so PSD drift cannot flip a divisor's sign.
Matrix stein_solve(const Matrix& gl, const Matrix& gr, double sigma2, const Matrix& y);

}  // namespace mixb2d

#endif  // MIXB2D_LINALG_HPP
