#include "mixb2d/baselines.hpp"

#include <cmath>
#include <random>

namespace mixb2d {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSigma2Floor = 1e-10;
constexpr double kDeadFraction = 1e-8;

}  // namespace

Matrix GlramModel::reconstruct(std::size_t n) const {
  return left * cores[n] * right.transpose() + mean;
}

GlramModel glram_fit(const SampleSet& data, Index r, Index c, int iters, bool center) {
  data.validate();
  const Index p = data.rows(), q = data.cols();
  if (r < 1 || c < 1 || r > p || c > q) {
    throw DimensionError("glram_fit: need 1 <= r <= p and 1 <= c <= q");
  }
  if (iters < 1) throw DimensionError("glram_fit: iters must be >= 1");

  GlramModel model;
  model.centered = center;
  model.mean = Matrix::Zero(p, q);
  if (center) {
    for (const Matrix& x : data.samples) model.mean += x;
    model.mean /= static_cast<double>(data.size());
  }
  std::vector<Matrix> centered;
  centered.reserve(data.size());
  double total_sq = 0.0;
  for (const Matrix& x : data.samples) {
    centered.push_back(x - model.mean);
    total_sq += centered.back().squaredNorm();
  }

  model.right = Matrix::Identity(q, c);
  auto captured = [&](const Matrix& left, const Matrix& right) {
    double s = 0.0;
    for (const Matrix& e : centered) s += (left.transpose() * e * right).squaredNorm();
    return s;
  };

  for (int it = 0; it < iters; ++it) {
    Matrix cov_l = Matrix::Zero(p, p);
    for (const Matrix& e : centered) {
      const Matrix er = e * model.right;
      cov_l.noalias() += er * er.transpose();
    }
    model.left = symmetric_eigen(0.5 * (cov_l + cov_l.transpose())).vectors.leftCols(r);
    model.objective.push_back(total_sq - captured(model.left, model.right));

    Matrix cov_r = Matrix::Zero(q, q);
    for (const Matrix& e : centered) {
      const Matrix el = e.transpose() * model.left;
      cov_r.noalias() += el * el.transpose();
    }
    model.right = symmetric_eigen(0.5 * (cov_r + cov_r.transpose())).vectors.leftCols(c);
    model.objective.push_back(total_sq - captured(model.left, model.right));
  }

  model.cores.reserve(data.size());
  for (const Matrix& e : centered) {
    model.cores.push_back(model.left.transpose() * e * model.right);
  }
  return model;
}

namespace {

struct ComponentStats {
  SpdFactor inner;  // sigma2 I_d + W^T W
  double logdet_cov;
};

ComponentStats make_stats(const Matrix& w, double sigma2, Index dim) {
  Matrix inner = w.transpose() * w;
  inner.diagonal().array() += sigma2;
  SpdFactor f(inner);
  const double logdet =
      static_cast<double>(dim - w.cols()) * std::log(sigma2) + f.logdet();
  return {std::move(f), logdet};
}

double gaussian_loglik(const Vector& e, const Matrix& w, const ComponentStats& stats,
                       double sigma2) {
  const Vector y = w.transpose() * e;
  const Vector u = stats.inner.solve(y);
  const double quad = (e.squaredNorm() - y.dot(u)) / sigma2;
  return -0.5 * (static_cast<double>(e.size()) * kLog2Pi + stats.logdet_cov + quad);
}

}  // namespace

std::vector<Vector> MixPpcaModel::features(const Vector& x) const {
  std::vector<Vector> out;
  out.reserve(K);
  for (int k = 0; k < K; ++k) {
    Matrix inner = loading[k].transpose() * loading[k];
    inner.diagonal().array() += noise[k];
    out.push_back(SpdFactor(inner).solve(loading[k].transpose() * (x - mean[k])));
  }
  return out;
}

Vector MixPpcaModel::posterior(const Vector& x) const {
  Vector logp(K);
  for (int k = 0; k < K; ++k) {
    const ComponentStats stats = make_stats(loading[k], noise[k], dim);
    logp(k) = std::log(weight[k]) + gaussian_loglik(x - mean[k], loading[k], stats, noise[k]);
  }
  const double m = logp.maxCoeff();
  if (!std::isfinite(m)) {
    throw NumericalError("mixppca posterior: all components have vanishing likelihood");
  }
  const double lse = m + std::log((logp.array() - m).exp().sum());
  return (logp.array() - lse).exp();
}

Vector MixPpcaModel::reconstruct(const Vector& x) const {
  const Vector post = posterior(x);
  int best = 0;
  for (int k = 1; k < K; ++k) {
    if (post(k) > post(best)) best = k;
  }
  Matrix inner = loading[best].transpose() * loading[best];
  inner.diagonal().array() += noise[best];
  const Vector z = SpdFactor(inner).solve(loading[best].transpose() * (x - mean[best]));
  return loading[best] * z + mean[best];
}

MixPpcaModel mixppca_fit(const SampleSet& data, const MixPpcaConfig& config) {
  data.validate();
  const auto N = data.size();
  const Index dim = data.rows() * data.cols();
  if (config.K < 1 || static_cast<std::size_t>(config.K) > N) {
    throw DimensionError("mixppca_fit: need 1 <= K <= N");
  }
  if (config.d < 1 || config.d > dim) {
    throw DimensionError("mixppca_fit: need 1 <= d <= pq");
  }

  std::vector<Vector> x(N);
  for (std::size_t n = 0; n < N; ++n) x[n] = vec(data.samples[n]);

  MixPpcaModel model;
  model.dim = dim;
  model.d = config.d;
  model.K = config.K;
  model.p = data.rows();
  model.q = data.cols();

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> pool(N);
  for (std::size_t i = 0; i < N; ++i) pool[i] = i;
  for (int k = 0; k < config.K; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, N - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < config.K; ++k) {
    model.weight.push_back(1.0 / config.K);
    model.mean.push_back(x[pool[k]]);
    Matrix w(dim, config.d);
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = gauss(rng);
    model.loading.push_back(std::move(w));
    model.noise.push_back(1.0);
  }

  std::mt19937_64 rescue_rng(config.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<int> rescue_count(config.K, 0);
  const int K = config.K;

  Eigen::MatrixXd gamma(N, K);
  for (int iter = 0; iter < config.max_iters; ++iter) {
    // E-step: responsibilities in log space; records the marginal likelihood.
    Eigen::MatrixXd logp(N, K);
    for (int k = 0; k < K; ++k) {
      const ComponentStats stats = make_stats(model.loading[k], model.noise[k], dim);
      const double logw = std::log(model.weight[k]);
      for (std::size_t n = 0; n < N; ++n) {
        logp(n, k) =
            logw + gaussian_loglik(x[n] - model.mean[k], model.loading[k], stats, model.noise[k]);
      }
    }
    double total_loglik = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double m = logp.row(n).maxCoeff();
      if (!std::isfinite(m)) {
        throw NumericalError("mixppca_fit: all components vanished for sample " +
                             std::to_string(n));
      }
      const double lse = m + std::log((logp.row(n).array() - m).exp().sum());
      total_loglik += lse;
      gamma.row(n) = (logp.row(n).array() - lse).exp();
    }
    model.loglik_trace.push_back(total_loglik);

    // M-step.
    for (int k = 0; k < K; ++k) {
      const double nk = gamma.col(k).sum();
      model.weight[k] = nk / static_cast<double>(N);
      if (nk < kDeadFraction * static_cast<double>(N)) {
        if (rescue_count[k] >= config.rescue_budget) {
          throw NumericalError("mixppca_fit: component " + std::to_string(k) +
                               " died after " + std::to_string(config.rescue_budget) +
                               " reinitializations");
        }
        ++rescue_count[k];
        ++model.total_reinits;
        std::uniform_int_distribution<std::size_t> pick(0, N - 1);
        model.mean[k] = x[pick(rescue_rng)];
        for (Index i = 0; i < model.loading[k].rows(); ++i)
          for (Index j = 0; j < model.loading[k].cols(); ++j)
            model.loading[k](i, j) = gauss(rescue_rng);
        model.noise[k] = 1.0;
        model.weight[k] = 1.0 / K;
        double total = 0.0;
        for (double w : model.weight) total += w;
        for (double& w : model.weight) w /= total;
        continue;
      }

      Vector mu = Vector::Zero(dim);
      for (std::size_t n = 0; n < N; ++n) mu.noalias() += gamma(n, k) * x[n];
      mu /= nk;
      model.mean[k] = mu;

      // Posterior statistics at the fresh mean, old loading/noise.
      const Matrix& w = model.loading[k];
      const double sigma2 = model.noise[k];
      Matrix inner = w.transpose() * w;
      inner.diagonal().array() += sigma2;
      const SpdFactor inner_f(inner);
      const Matrix inner_inv = inner_f.inverse();

      Matrix sum_ez = Matrix::Zero(dim, config.d);
      Matrix sum_zz = Matrix::Zero(config.d, config.d);
      double sum_ee = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const double g = gamma(n, k);
        if (g == 0.0) continue;
        const Vector e = x[n] - mu;
        const Vector z = inner_f.solve(w.transpose() * e);
        sum_ez.noalias() += g * e * z.transpose();
        sum_zz.noalias() += g * (sigma2 * inner_inv + z * z.transpose());
        sum_ee += g * e.squaredNorm();
      }
      Matrix w_new;
      try {
        w_new = SpdFactor(0.5 * (sum_zz + sum_zz.transpose()))
                    .solve(sum_ez.transpose())
                    .transpose();
      } catch (const NotPositiveDefiniteError&) {
        throw NumericalError("mixppca_fit: singular latent moment sum for component " +
                             std::to_string(k));
      }
      const double s2 = (sum_ee - 2.0 * (w_new.cwiseProduct(sum_ez)).sum() +
                         (sum_zz.cwiseProduct(w_new.transpose() * w_new)).sum()) /
                        (nk * static_cast<double>(dim));
      model.loading[k] = std::move(w_new);
      model.noise[k] = std::max(s2, kSigma2Floor);
    }

    if (config.track_recon) {
      double total = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        total += (x[n] - model.reconstruct(x[n])).squaredNorm();
      }
      model.recon_trace.push_back(std::sqrt(total / static_cast<double>(N)));
    }
  }
  return model;
}

}  // namespace mixb2d
