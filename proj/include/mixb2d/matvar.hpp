#ifndef MIXB2D_MATVAR_HPP
#define MIXB2D_MATVAR_HPP

#include <optional>

#include "mixb2d/linalg.hpp"

namespace mixb2d {

/// Matrix-variate Gaussian with isotropic row/column covariances
/// (row_scale * I_p, col_scale * I_q); vec covariance is row_scale*col_scale*I.
struct MatrixNormal {
  Matrix mean;
  double row_scale = 1.0;
  double col_scale = 1.0;
};

double matnormal_logpdf(const Matrix& x, const MatrixNormal& dist);

/// Marginal Gaussian of one mixture component over vectorized observations:
/// N(vec(mean), (R R^T) kron (L L^T) + sigma2 * I).
///
/// Evaluation never forms the pq x pq covariance. The quadratic form goes
/// through the Woodbury identity with W = R kron L, using only the cached
/// rc x rc factor of (sigma2 I + (R^T R) kron (L^T L)); the log-determinant
/// comes from the matrix determinant lemma. Immutable after construction.
class ComponentMarginal {
 public:
  ComponentMarginal(Matrix mean, Matrix loading_left, Matrix loading_right, double noise_var);

  double loglik(const Matrix& x) const;

  /// Direct evaluation through the dense pq x pq covariance. Guarded to
  /// pq <= 64; exists for oracle comparisons and the benchmark command.
  double loglik_dense(const Matrix& x) const;

  Index rows() const { return mean_.rows(); }
  Index cols() const { return mean_.cols(); }
  const Matrix& mean() const { return mean_; }
  const Matrix& loading_left() const { return left_; }
  const Matrix& loading_right() const { return right_; }
  double noise_var() const { return sigma2_; }
  double logdet_cov() const { return logdet_cov_; }
  const SpdFactor& inner_factor() const { return *inner_; }

 private:
  Matrix mean_, left_, right_;
  double sigma2_;
  std::optional<SpdFactor> inner_;  // sigma2 I + (R^T R) kron (L^T L)
  double logdet_cov_ = 0.0;
};

double marginal_loglik(const Matrix& x, const ComponentMarginal& comp);

}  // namespace mixb2d

#endif  // MIXB2D_MATVAR_HPP
