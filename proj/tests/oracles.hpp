// Test-only reference implementations, kept independent of the library's
// computational paths on purpose: plain Gaussian elimination, dense
// Kronecker-system solves, dense-covariance Gaussian densities.
#ifndef MIXB2D_TESTS_ORACLES_HPP
#define MIXB2D_TESTS_ORACLES_HPP

#include <cmath>
#include <random>
#include <stdexcept>

#include "mixb2d/linalg.hpp"

namespace oracles {

using mixb2d::Index;
using mixb2d::Matrix;
using mixb2d::Vector;

/// Dense solve via Gaussian elimination with partial pivoting.
inline Vector ge_solve(Matrix a, Vector b) {
  const Index n = a.rows();
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    for (Index i = col + 1; i < n; ++i) {
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    }
    if (a(pivot, col) == 0.0) throw std::runtime_error("ge_solve: singular");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      std::swap(b(pivot), b(col));
    }
    for (Index i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      a.row(i).tail(n - col) -= f * a.row(col).tail(n - col);
      b(i) -= f * b(col);
    }
  }
  Vector x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (Index j = i + 1; j < n; ++j) s -= a(i, j) * x(j);
    x(i) = s / a(i, i);
  }
  return x;
}

/// Kronecker product from the elementwise definition.
inline Matrix kron_definition(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) {
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
    }
  }
  return out;
}

/// Column-stacking by explicit loops.
inline Vector vec_definition(const Matrix& x) {
  Vector v(x.size());
  Index t = 0;
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) v(t++) = x(i, j);
  }
  return v;
}

/// Solves (gr kron gl + sigma2 I) vec(Q) = vec(y) densely.
inline Matrix stein_solve_dense(const Matrix& gl, const Matrix& gr, double sigma2,
                                const Matrix& y) {
  Matrix sys = kron_definition(gr, gl);
  sys.diagonal().array() += sigma2;
  const Vector q = ge_solve(sys, vec_definition(y));
  Matrix out(y.rows(), y.cols());
  Index t = 0;
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < y.rows(); ++i) out(i, j) = q(t++);
  }
  return out;
}

/// log N(x; mean, cov) with a dense covariance, via elimination and the
/// log-determinant from the pivoted LU diagonal.
inline double dense_gaussian_logpdf(const Vector& x, const Vector& mean, Matrix cov) {
  const Index n = cov.rows();
  // LU with partial pivoting for the determinant.
  Matrix a = cov;
  double logdet = 0.0;
  int swaps = 0;
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    for (Index i = col + 1; i < n; ++i) {
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    }
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      ++swaps;
    }
    logdet += std::log(std::abs(a(col, col)));
    for (Index i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      a.row(i).tail(n - col) -= f * a.row(col).tail(n - col);
    }
  }
  (void)swaps;  // covariances have positive determinant
  const Vector diff = x - mean;
  const double quad = diff.dot(ge_solve(cov, diff));
  constexpr double log2pi = 1.8378770664093454836;
  return -0.5 * (static_cast<double>(n) * log2pi + logdet + quad);
}

/// log|det A| via LU with partial pivoting.
inline double lu_logdet(Matrix a) {
  const Index n = a.rows();
  double logdet = 0.0;
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    for (Index i = col + 1; i < n; ++i) {
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    }
    if (pivot != col) a.row(pivot).swap(a.row(col));
    logdet += std::log(std::abs(a(col, col)));
    for (Index i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      a.row(i).tail(n - col) -= f * a.row(col).tail(n - col);
    }
  }
  return logdet;
}

/// Random symmetric PSD matrix A = G G^T / n with standard-normal G.
inline Matrix random_psd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = gauss(rng);
  Matrix a = g * g.transpose() / static_cast<double>(n);
  return 0.5 * (a + a.transpose());
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

}  // namespace oracles

#endif  // MIXB2D_TESTS_ORACLES_HPP
