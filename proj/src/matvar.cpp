#include "mixb2d/matvar.hpp"

#include <cmath>
#include <numbers>

namespace mixb2d {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

double matnormal_logpdf(const Matrix& x, const MatrixNormal& dist) {
  if (x.rows() != dist.mean.rows() || x.cols() != dist.mean.cols()) {
    throw DimensionError("matnormal_logpdf: sample shape does not match mean");
  }
  if (!(dist.row_scale > 0.0) || !(dist.col_scale > 0.0)) {
    throw DimensionError("matnormal_logpdf: scales must be positive");
  }
  const double n = static_cast<double>(x.size());
  const double var = dist.row_scale * dist.col_scale;
  const double ssq = (x - dist.mean).squaredNorm();
  return -0.5 * n * (kLog2Pi + std::log(var)) - 0.5 * ssq / var;
}

ComponentMarginal::ComponentMarginal(Matrix mean, Matrix loading_left, Matrix loading_right,
                                     double noise_var)
    : mean_(std::move(mean)),
      left_(std::move(loading_left)),
      right_(std::move(loading_right)),
      sigma2_(noise_var) {
  if (!(sigma2_ > 0.0)) {
    throw DimensionError("ComponentMarginal: noise variance must be positive");
  }
  if (left_.rows() != mean_.rows() || right_.rows() != mean_.cols()) {
    throw DimensionError("ComponentMarginal: loading shapes do not match mean");
  }
  const Index pq = mean_.size();
  const Index rc = left_.cols() * right_.cols();
  Matrix inner = kron(right_.transpose() * right_, left_.transpose() * left_);
  inner.diagonal().array() += sigma2_;
  inner_.emplace(inner);
  logdet_cov_ = static_cast<double>(pq - rc) * std::log(sigma2_) + inner_->logdet();
}

double ComponentMarginal::loglik(const Matrix& x) const {
  if (x.rows() != rows() || x.cols() != cols()) {
    throw DimensionError("marginal_loglik: sample shape does not match component");
  }
  const Matrix e = x - mean_;
  const Vector y = vec(left_.transpose() * e * right_);
  const Vector u = inner_->solve(y);
  const double quad = (e.squaredNorm() - y.dot(u)) / sigma2_;
  return -0.5 * (static_cast<double>(e.size()) * kLog2Pi + logdet_cov_ + quad);
}

double ComponentMarginal::loglik_dense(const Matrix& x) const {
  const Index pq = mean_.size();
  if (pq > 64) {
    throw DimensionError("loglik_dense: guarded to pq <= 64, got " + std::to_string(pq));
  }
  if (x.rows() != rows() || x.cols() != cols()) {
    throw DimensionError("loglik_dense: sample shape does not match component");
  }
  Matrix cov = kron(right_ * right_.transpose(), left_ * left_.transpose());
  cov.diagonal().array() += sigma2_;
  SpdFactor f(cov);
  const Vector e = vec(x - mean_);
  const double quad = e.dot(vec(f.solve(e)));
  return -0.5 * (static_cast<double>(pq) * kLog2Pi + f.logdet() + quad);
}

double marginal_loglik(const Matrix& x, const ComponentMarginal& comp) {
  return comp.loglik(x);
}

}  // namespace mixb2d
