#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mixb2d/linalg.hpp"
#include "oracles.hpp"

using namespace mixb2d;

TEST_CASE("kron identity and scalar cases") {
  CHECK((kron(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) - Matrix::Identity(6, 6)).norm() ==
        0.0);

  std::mt19937_64 rng(1);
  const Matrix b = oracles::random_matrix(3, 4, rng);
  Matrix two(1, 1);
  two(0, 0) = 2.0;
  CHECK((kron(two, b) - 2.0 * b).norm() == 0.0);
}

TEST_CASE("kron matches the elementwise definition") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  const Matrix expect = oracles::kron_definition(a, b);
  CHECK((kron(a, b) - expect).norm() == 0.0);

  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix x = oracles::random_matrix(3, 2, rng);
    const Matrix y = oracles::random_matrix(2, 4, rng);
    CHECK((kron(x, y) - oracles::kron_definition(x, y)).norm() == 0.0);
  }
}

TEST_CASE("kron is bilinear") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = oracles::random_matrix(3, 3, rng);
    const Matrix a2 = oracles::random_matrix(3, 3, rng);
    const Matrix b = oracles::random_matrix(2, 2, rng);
    const Matrix lhs = kron(a + a2, b);
    const Matrix rhs = kron(a, b) + kron(a2, b);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("kron dimension cap") {
  CHECK_THROWS_AS(kron(Matrix::Zero(100, 100), Matrix::Zero(100, 100), 1000), DimensionError);
}

TEST_CASE("vec follows the column-stacking convention") {
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  Vector expect(4);
  expect << 1, 3, 2, 4;
  CHECK((vec(x) - expect).norm() == 0.0);
}

TEST_CASE("unvec round-trips vec") {
  std::mt19937_64 rng(4);
  const Matrix x = oracles::random_matrix(3, 5, rng);
  CHECK((unvec(vec(x), 3, 5) - x).norm() == 0.0);
  CHECK_THROWS_AS(unvec(vec(x), 4, 5), DimensionError);
}

TEST_CASE("vec(AXB) = kron(B^T, A) vec(X)") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = oracles::random_matrix(2, 3, rng);
    const Matrix x = oracles::random_matrix(3, 4, rng);
    const Matrix b = oracles::random_matrix(4, 2, rng);
    const Matrix axb = a * x * b;
    const Vector lhs = vec(axb);
    const Vector rhs = kron(b.transpose(), a) * vec(x);
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, axb.norm()));
  }
}

TEST_CASE("spd_factorize trivial identities") {
  CHECK(spd_logdet(spd_factorize(Matrix::Identity(5, 5))) == doctest::Approx(0.0).epsilon(1e-15));

  Vector b(3);
  b << 1, -2, 5;
  const Matrix two_i = 2.0 * Matrix::Identity(3, 3);
  const Matrix solved = spd_solve(spd_factorize(two_i), b);
  CHECK((solved - 0.5 * b).norm() <= 1e-14);
}

TEST_CASE("spd_solve agrees with Gaussian elimination") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = oracles::random_matrix(6, 4, rng);
    Matrix spd = a.transpose() * a + Matrix::Identity(4, 4);
    spd = 0.5 * (spd + spd.transpose());
    const Vector b = oracles::random_matrix(4, 1, rng);
    const Vector expect = oracles::ge_solve(spd, b);
    const Vector got = spd_solve(spd_factorize(spd), b);
    CHECK((got - expect).norm() <= 1e-9 * std::max(1.0, expect.norm()));
  }
}

TEST_CASE("spd_solve round-trips under high condition numbers") {
  // At condition 1e8 the double-precision representation of x alone already
  // produces residuals near eps*cond*||b|| ~ 2e-8, so the 1e-9 round-trip
  // bound is checked as plain relative residual up to condition 1e6 and as
  // normwise backward error at 1e8.
  std::mt19937_64 rng(7);
  auto conditioned = [&rng](int n, double log_cond) {
    Matrix g = oracles::random_matrix(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    Vector eig(n);
    for (int i = 0; i < n; ++i) eig(i) = std::pow(10.0, -log_cond * i / (n - 1));
    Matrix a = q * eig.asDiagonal() * q.transpose();
    return Matrix(0.5 * (a + a.transpose()));
  };
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 6;
    const Matrix a6 = conditioned(n, 6.0);
    const Vector b6 = oracles::random_matrix(n, 1, rng);
    const Vector x6 = spd_solve(spd_factorize(a6), b6);
    CHECK((a6 * x6 - b6).norm() <= 1e-9 * b6.norm());

    const Matrix a8 = conditioned(n, 8.0);
    const Vector b8 = oracles::random_matrix(n, 1, rng);
    const Vector x8 = spd_solve(spd_factorize(a8), b8);
    const double backward =
        (a8 * x8 - b8).norm() / (a8.norm() * x8.norm() + b8.norm());
    CHECK(backward <= 1e-9);
  }
}

TEST_CASE("spd_factorize reports the failing pivot") {
  Matrix m(3, 3);
  m << 1, 0, 0, 0, -2, 0, 0, 0, 3;
  try {
    spd_factorize(m);
    FAIL("expected NotPositiveDefiniteError");
  } catch (const NotPositiveDefiniteError& err) {
    CHECK(err.pivot() == 1);
  }
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  CHECK_THROWS_AS(spd_factorize(asym), DimensionError);
}

TEST_CASE("spd_logdet equals twice the log of factor diagonal") {
  std::mt19937_64 rng(9);
  const Matrix a = oracles::random_psd(5, rng) + Matrix::Identity(5, 5);
  const SpdFactor f = spd_factorize(a);
  CHECK(f.logdet() ==
        doctest::Approx(2.0 * f.lower().diagonal().array().log().sum()).epsilon(1e-14));
}

TEST_CASE("symmetric_eigen trivial spectra") {
  const SymmetricEigen id = symmetric_eigen(Matrix::Identity(3, 3));
  CHECK((id.values - Vector::Ones(3)).norm() <= 1e-14);
  CHECK((id.vectors * id.vectors.transpose() - Matrix::Identity(3, 3)).norm() <= 1e-10);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  const SymmetricEigen de = symmetric_eigen(d);
  Vector expect(3);
  expect << 3, 2, 1;
  CHECK((de.values - expect).norm() <= 1e-14);
}

TEST_CASE("symmetric_eigen reconstructs the input") {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix a = oracles::random_matrix(8, 8, rng);
    a = 0.5 * (a + a.transpose()).eval();
    const SymmetricEigen e = symmetric_eigen(a);
    const Matrix rebuilt = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((rebuilt - a).norm() <= 1e-9 * std::max(1.0, a.norm()));
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(8, 8)).norm() <= 1e-10);
    for (Index i = 1; i < e.values.size(); ++i) CHECK(e.values(i - 1) >= e.values(i));
  }
}

TEST_CASE("stein_solve identity operators halve the rhs") {
  std::mt19937_64 rng(11);
  const Matrix y = oracles::random_matrix(3, 4, rng);
  const Matrix q = stein_solve(Matrix::Identity(3, 3), Matrix::Identity(4, 4), 1.0, y);
  CHECK((q - 0.5 * y).norm() <= 1e-12 * y.norm());
}

TEST_CASE("stein_solve zero rhs gives zero") {
  std::mt19937_64 rng(12);
  const Matrix gl = oracles::random_psd(3, rng);
  const Matrix gr = oracles::random_psd(2, rng);
  const Matrix q = stein_solve(gl, gr, 0.5, Matrix::Zero(3, 2));
  CHECK(q.norm() == 0.0);
}

TEST_CASE("stein_solve matches the dense Kronecker system") {
  std::mt19937_64 rng(13);
  const Matrix gl = oracles::random_psd(4, rng);
  const Matrix gr = oracles::random_psd(3, rng);
  const Matrix y = oracles::random_matrix(4, 3, rng);
  const double sigma2 = 0.7;
  const Matrix q = stein_solve(gl, gr, sigma2, y);
  const Matrix expect = oracles::stein_solve_dense(gl, gr, sigma2, y);
  CHECK((q - expect).norm() <= 1e-10 * std::max(1.0, expect.norm()));
}

TEST_CASE("stein_solve residual stays below 1e-10 across noise scales") {
  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 100; ++rep) {
    const Index r = 2 + static_cast<Index>(rng() % 4);
    const Index c = 2 + static_cast<Index>(rng() % 4);
    const Matrix gl = oracles::random_psd(r, rng);
    const Matrix gr = oracles::random_psd(c, rng);
    const double sigma2 = std::pow(10.0, -4.0 + 5.0 * (rep / 100.0));
    const Matrix y = oracles::random_matrix(r, c, rng);
    const Matrix q = stein_solve(gl, gr, sigma2, y);
    const Matrix resid = gl * q * gr + sigma2 * q - y;
    CHECK(resid.norm() <= 1e-10 * y.norm());
  }
}

TEST_CASE("stein_solve handles rank-deficient operators") {
  std::mt19937_64 rng(15);
  Matrix gl = Matrix::Zero(3, 3);  // all eigenvalues clamp to zero
  const Matrix gr = oracles::random_psd(2, rng);
  const Matrix y = oracles::random_matrix(3, 2, rng);
  const Matrix q = stein_solve(gl, gr, 0.3, y);
  CHECK((0.3 * q - y).norm() <= 1e-12 * y.norm());
}

TEST_CASE("stein_solve rejects bad inputs") {
  CHECK_THROWS_AS(stein_solve(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0.0,
                              Matrix::Zero(2, 2)),
                  DimensionError);
  CHECK_THROWS_AS(stein_solve(Matrix::Identity(2, 2), Matrix::Identity(2, 2), -1.0,
                              Matrix::Zero(2, 2)),
                  DimensionError);
  Matrix skew(2, 2);
  skew << 0, 1, -1, 0;
  CHECK_THROWS_AS(stein_solve(skew, Matrix::Identity(2, 2), 1.0, Matrix::Zero(2, 2)),
                  DimensionError);
}
