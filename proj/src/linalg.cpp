#include "mixb2d/linalg.hpp"

#include <cmath>
#include <string>

namespace mixb2d {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw DimensionError(std::string(what) + ": non-finite entries");
  }
}

Matrix kron(const Matrix& a, const Matrix& b, std::int64_t entry_cap) {
  const std::int64_t rows = static_cast<std::int64_t>(a.rows()) * b.rows();
  const std::int64_t cols = static_cast<std::int64_t>(a.cols()) * b.cols();
  if (rows * cols > entry_cap) {
    throw DimensionError("kron: result would have " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " entries, cap is " + std::to_string(entry_cap));
  }
  Matrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw DimensionError("unvec: vector length " + std::to_string(v.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

namespace {

void require_symmetric(const Matrix& a, const char* what, double rel_tol = 1e-10) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
  const double asym = (a - a.transpose()).norm();
  if (asym > rel_tol * std::max(1.0, a.norm())) {
    throw DimensionError(std::string(what) + ": matrix is not symmetric (asymmetry " +
                         std::to_string(asym) + ")");
  }
}

}  // namespace

SpdFactor::SpdFactor(const Matrix& a) : original_(a) {
  require_symmetric(a, "spd_factorize");
  const Index n = a.rows();
  lower_ = Matrix::Zero(n, n);
  // Cholesky-Crout; kept by hand so the failing pivot can be reported.
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j) - lower_.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NotPositiveDefiniteError("spd_factorize: matrix is not positive definite",
                                     static_cast<int>(j));
    }
    d = std::sqrt(d);
    lower_(j, j) = d;
    for (Index i = j + 1; i < n; ++i) {
      lower_(i, j) = (a(i, j) - lower_.row(i).head(j).dot(lower_.row(j).head(j))) / d;
    }
  }
}

Matrix SpdFactor::solve(const Matrix& b) const {
  if (b.rows() != dim()) {
    throw DimensionError("spd_solve: rhs has " + std::to_string(b.rows()) +
                         " rows, factor dimension is " + std::to_string(dim()));
  }
  auto backsolve = [this](const Matrix& rhs) -> Matrix {
    Matrix y = lower_.triangularView<Eigen::Lower>().solve(rhs);
    return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
  };
  Matrix x = backsolve(b);
  // Iterative refinement keeps the residual near machine precision even for
  // condition numbers around 1e8.
  const double bnorm = std::max(b.norm(), 1e-300);
  for (int pass = 0; pass < 3; ++pass) {
    const Matrix resid = b - original_ * x;
    if (resid.norm() <= 1e-14 * bnorm) break;
    x += backsolve(resid);
  }
  return x;
}

Matrix SpdFactor::inverse() const {
  return solve(Matrix::Identity(dim(), dim()));
}

double SpdFactor::logdet() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

SpdFactor spd_factorize(const Matrix& a) { return SpdFactor(a); }

Matrix spd_solve(const SpdFactor& f, const Matrix& b) { return f.solve(b); }

double spd_logdet(const SpdFactor& f) { return f.logdet(); }

SymmetricEigen symmetric_eigen(const Matrix& a) {
  require_symmetric(a, "symmetric_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric_eigen: eigensolver failed to converge");
  }
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Matrix stein_solve(const Matrix& gl, const Matrix& gr, double sigma2, const Matrix& y) {
  if (!(sigma2 > 0.0)) {
    throw DimensionError("stein_solve: sigma2 must be positive, got " + std::to_string(sigma2));
  }
  if (y.rows() != gl.rows() || y.cols() != gr.rows()) {
    throw DimensionError("stein_solve: rhs shape does not match operators");
  }
  SymmetricEigen el = symmetric_eigen(gl);
  SymmetricEigen er = symmetric_eigen(gr);
  auto clamp = [](Vector& v) {
    const double floor = 1e-12 * std::max(0.0, v.size() > 0 ? v(0) : 0.0);
    for (Index i = 0; i < v.size(); ++i) {
      if (v(i) < floor) v(i) = 0.0;
    }
  };
  clamp(el.values);
  clamp(er.values);

  Matrix ytil = el.vectors.transpose() * y * er.vectors;
  for (Index i = 0; i < ytil.rows(); ++i) {
    for (Index j = 0; j < ytil.cols(); ++j) {
      ytil(i, j) /= el.values(i) * er.values(j) + sigma2;
    }
  }
  return el.vectors * ytil * er.vectors.transpose();
}

}  // namespace mixb2d
