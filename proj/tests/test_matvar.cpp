#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mixb2d/matvar.hpp"
#include "oracles.hpp"

using namespace mixb2d;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Dense-covariance reference: N(vec(x); vec(mean), C) built explicitly.
double dense_marginal(const Matrix& x, const Matrix& mean, const Matrix& L, const Matrix& R,
                      double sigma2) {
  Matrix cov = oracles::kron_definition(R * R.transpose(), L * L.transpose());
  cov.diagonal().array() += sigma2;
  return oracles::dense_gaussian_logpdf(oracles::vec_definition(x), oracles::vec_definition(mean),
                                        cov);
}

}  // namespace

TEST_CASE("matnormal_logpdf standard normal at the mode") {
  MatrixNormal d{Matrix::Zero(1, 1), 1.0, 1.0};
  CHECK(matnormal_logpdf(Matrix::Zero(1, 1), d) == doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-14));
}

TEST_CASE("matnormal_logpdf of the standard prior at zero") {
  // r=2, c=3: value is -(rc/2) log(2 pi) = -3 log(2 pi).
  MatrixNormal prior{Matrix::Zero(2, 3), 1.0, 1.0};
  CHECK(matnormal_logpdf(Matrix::Zero(2, 3), prior) ==
        doctest::Approx(-3.0 * kLog2Pi).epsilon(1e-14));
}

TEST_CASE("matnormal_logpdf matches a dense vectorized Gaussian") {
  std::mt19937_64 rng(21);
  const Matrix mean = oracles::random_matrix(3, 4, rng);
  const Matrix x = oracles::random_matrix(3, 4, rng);
  MatrixNormal d{mean, 0.7, 2.3};
  const Matrix cov = 0.7 * 2.3 * Matrix::Identity(12, 12);
  const double expect = oracles::dense_gaussian_logpdf(oracles::vec_definition(x),
                                                       oracles::vec_definition(mean), cov);
  CHECK(matnormal_logpdf(x, d) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("matnormal_logpdf rejects bad input") {
  MatrixNormal d{Matrix::Zero(2, 2), 1.0, 1.0};
  CHECK_THROWS_AS(matnormal_logpdf(Matrix::Zero(3, 2), d), DimensionError);
  MatrixNormal bad{Matrix::Zero(2, 2), -1.0, 1.0};
  CHECK_THROWS_AS(matnormal_logpdf(Matrix::Zero(2, 2), bad), DimensionError);
}

TEST_CASE("matnormal density integrates to one") {
  // 1x1 with unit scales.
  {
    MatrixNormal d{Matrix::Zero(1, 1), 1.0, 1.0};
    const double h = 0.01;
    double total = 0.0;
    for (double t = -6.0; t <= 6.0; t += h) {
      Matrix x(1, 1);
      x(0, 0) = t;
      total += std::exp(matnormal_logpdf(x, d)) * h;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
  }
  // 2x2 with anisotropic scales (variance 0.8 * 1.3 per entry).
  {
    MatrixNormal d{Matrix::Zero(2, 2), 0.8, 1.3};
    const double sd = std::sqrt(0.8 * 1.3);
    const double h = 0.5 * sd;
    const double lim = 6.0 * sd;
    double total = 0.0;
    Matrix x(2, 2);
    for (double a = -lim; a <= lim; a += h)
      for (double b = -lim; b <= lim; b += h)
        for (double c = -lim; c <= lim; c += h)
          for (double e = -lim; e <= lim; e += h) {
            x << a, b, c, e;
            total += std::exp(matnormal_logpdf(x, d)) * h * h * h * h;
          }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("marginal_loglik with zero loadings is the isotropic Gaussian") {
  std::mt19937_64 rng(22);
  const Matrix mean = oracles::random_matrix(3, 4, rng);
  const Matrix x = oracles::random_matrix(3, 4, rng);
  const double sigma2 = 0.6;
  ComponentMarginal comp(mean, Matrix::Zero(3, 2), Matrix::Zero(4, 2), sigma2);
  const double expect =
      -0.5 * (12.0 * (kLog2Pi + std::log(sigma2)) + (x - mean).squaredNorm() / sigma2);
  CHECK(marginal_loglik(x, comp) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("marginal_loglik matches the dense covariance evaluation") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const Index p = 2 + static_cast<Index>(rng() % 5);
    const Index q = 2 + static_cast<Index>(rng() % 5);
    const Index r = 1 + static_cast<Index>(rng() % 3);
    const Index c = 1 + static_cast<Index>(rng() % 3);
    std::uniform_real_distribution<double> logs(-3.0, 1.0);
    const double sigma2 = std::pow(10.0, logs(rng));
    const Matrix mean = oracles::random_matrix(p, q, rng);
    const Matrix L = oracles::random_matrix(p, r, rng);
    const Matrix R = oracles::random_matrix(q, c, rng);
    const Matrix x = oracles::random_matrix(p, q, rng);
    ComponentMarginal comp(mean, L, R, sigma2);
    const double expect = dense_marginal(x, mean, L, R, sigma2);
    CHECK(std::abs(marginal_loglik(x, comp) - expect) <= 1e-8);
  }
}

TEST_CASE("marginal_loglik small case against dense 4x4 covariance") {
  std::mt19937_64 rng(24);
  const Matrix mean = oracles::random_matrix(2, 2, rng);
  const Matrix L = oracles::random_matrix(2, 1, rng);
  const Matrix R = oracles::random_matrix(2, 1, rng);
  const double sigma2 = 0.4;
  const Matrix x = oracles::random_matrix(2, 2, rng);
  ComponentMarginal comp(mean, L, R, sigma2);
  CHECK(std::abs(marginal_loglik(x, comp) - dense_marginal(x, mean, L, R, sigma2)) <= 1e-9);
}

TEST_CASE("marginal_loglik is translation invariant") {
  std::mt19937_64 rng(25);
  const Matrix mean = oracles::random_matrix(3, 3, rng);
  const Matrix L = oracles::random_matrix(3, 2, rng);
  const Matrix R = oracles::random_matrix(3, 2, rng);
  const Matrix x = oracles::random_matrix(3, 3, rng);
  const Matrix shift = oracles::random_matrix(3, 3, rng);
  ComponentMarginal base(mean, L, R, 0.8);
  ComponentMarginal moved(mean + shift, L, R, 0.8);
  CHECK(std::abs(marginal_loglik(x + shift, moved) - marginal_loglik(x, base)) <= 1e-10);
}

TEST_CASE("marginal_loglik is maximized at the mean") {
  std::mt19937_64 rng(26);
  const Matrix mean = oracles::random_matrix(3, 3, rng);
  const Matrix L = oracles::random_matrix(3, 2, rng);
  const Matrix R = oracles::random_matrix(3, 2, rng);
  ComponentMarginal comp(mean, L, R, 0.5);
  const double at_mean = marginal_loglik(mean, comp);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix delta = oracles::random_matrix(3, 3, rng);
    delta *= 1e-2 / delta.norm();
    CHECK(marginal_loglik(mean + delta, comp) < at_mean);
  }
}

TEST_CASE("cached log-determinant matches the determinant lemma form") {
  std::mt19937_64 rng(27);
  const Index p = 4, q = 5, r = 2, c = 3;
  const Matrix L = oracles::random_matrix(p, r, rng);
  const Matrix R = oracles::random_matrix(q, c, rng);
  const double sigma2 = 0.35;
  ComponentMarginal comp(Matrix::Zero(p, q), L, R, sigma2);
  const Matrix inner =
      oracles::kron_definition(R.transpose() * R, L.transpose() * L) / sigma2 +
      Matrix::Identity(r * c, r * c);
  const double expect =
      static_cast<double>(p * q) * std::log(sigma2) + oracles::lu_logdet(inner);
  CHECK(comp.logdet_cov() == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("loglik_dense agrees with the test oracle and is size-guarded") {
  std::mt19937_64 rng(28);
  const Matrix mean = oracles::random_matrix(4, 4, rng);
  const Matrix L = oracles::random_matrix(4, 2, rng);
  const Matrix R = oracles::random_matrix(4, 2, rng);
  const Matrix x = oracles::random_matrix(4, 4, rng);
  ComponentMarginal comp(mean, L, R, 0.9);
  CHECK(comp.loglik_dense(x) ==
        doctest::Approx(dense_marginal(x, mean, L, R, 0.9)).epsilon(1e-10));

  ComponentMarginal big(Matrix::Zero(9, 9), Matrix::Zero(9, 2), Matrix::Zero(9, 2), 1.0);
  CHECK_THROWS_AS(big.loglik_dense(Matrix::Zero(9, 9)), DimensionError);
}

TEST_CASE("ComponentMarginal rejects invalid construction") {
  CHECK_THROWS_AS(
      ComponentMarginal(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(2, 1), 0.0),
      DimensionError);
  CHECK_THROWS_AS(
      ComponentMarginal(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(2, 1), 1.0),
      DimensionError);
}
