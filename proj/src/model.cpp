#include "mixb2d/model.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "mixb2d/matvar.hpp"
#include "mixb2d/parallel.hpp"

namespace mixb2d {

namespace {

constexpr double kSigma2Floor = 1e-10;
constexpr double kDeadFraction = 1e-8;
constexpr double kInnerTol = 1e-8;
constexpr int kInnerSweepCap = 50;

double trace_product(const Matrix& a, const Matrix& b) {
  // tr(a b) for symmetric a, b.
  return a.cwiseProduct(b).sum();
}

}  // namespace

void MixtureParams::validate() const {
  if (K < 1 || static_cast<int>(weight.size()) != K || static_cast<int>(mean.size()) != K ||
      static_cast<int>(left.size()) != K || static_cast<int>(right.size()) != K ||
      static_cast<int>(noise.size()) != K) {
    throw DimensionError("MixtureParams: inconsistent component count");
  }
  if (r > p || c > q) {
    throw DimensionError("MixtureParams: core dimensions exceed data dimensions");
  }
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    if (weight[k] < 0.0) throw DimensionError("MixtureParams: negative weight");
    if (!(noise[k] > 0.0)) throw DimensionError("MixtureParams: noise variance must be positive");
    if (mean[k].rows() != p || mean[k].cols() != q || left[k].rows() != p ||
        left[k].cols() != r || right[k].rows() != q || right[k].cols() != c) {
      throw DimensionError("MixtureParams: component " + std::to_string(k) + " has wrong shape");
    }
    total += weight[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DimensionError("MixtureParams: weights sum to " + std::to_string(total));
  }
}

LatentPosterior::LatentPosterior(std::size_t n_samples, int n_components, Index r, Index c)
    : n_(n_samples), k_(n_components), entries_(n_samples * n_components) {
  for (auto& e : entries_) {
    e.core_mean = Matrix::Zero(r, c);
    e.row_cov = Matrix::Identity(r, r);
    e.col_cov = Matrix::Identity(c, c);
  }
}

int Responsibilities::argmax(std::size_t n) const {
  int best = 0;
  for (int k = 1; k < gamma.cols(); ++k) {
    if (gamma(n, k) > gamma(n, best)) best = k;
  }
  return best;
}

MixtureParams init_params(const SampleSet& data, int K, Index r, Index c, std::uint64_t seed) {
  data.validate();
  const auto N = data.size();
  if (K < 1) throw DimensionError("init_params: K must be >= 1");
  if (static_cast<std::size_t>(K) > N) {
    throw DimensionError("init_params: K=" + std::to_string(K) + " exceeds sample count " +
                         std::to_string(N));
  }
  if (r < 1 || c < 1 || r > data.rows() || c > data.cols()) {
    throw DimensionError("init_params: core dims must satisfy 1 <= r <= p and 1 <= c <= q");
  }
  MixtureParams params;
  params.p = data.rows();
  params.q = data.cols();
  params.r = r;
  params.c = c;
  params.K = K;

  std::mt19937_64 rng(seed);
  // K distinct sample indices via partial Fisher-Yates.
  std::vector<std::size_t> pool(N);
  for (std::size_t i = 0; i < N; ++i) pool[i] = i;
  for (int k = 0; k < K; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, N - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < K; ++k) {
    params.weight.push_back(1.0 / K);
    params.mean.push_back(data.samples[pool[k]]);
    Matrix L(params.p, r), R(params.q, c);
    for (Index i = 0; i < L.rows(); ++i)
      for (Index j = 0; j < L.cols(); ++j) L(i, j) = gauss(rng);
    for (Index i = 0; i < R.rows(); ++i)
      for (Index j = 0; j < R.cols(); ++j) R(i, j) = gauss(rng);
    params.left.push_back(std::move(L));
    params.right.push_back(std::move(R));
    params.noise.push_back(1.0);
  }
  return params;
}

namespace {

LatentEntry update_latent_impl(const Matrix& x, const Matrix& mean, const Matrix& left,
                               const Matrix& right, const Matrix& ltl, const Matrix& rtr,
                               double sigma2, const LatentEntry& prev) {
  const Index r = ltl.rows(), c = rtr.rows();
  const double dr = static_cast<double>(r), dc = static_cast<double>(c);
  LatentEntry out;
  Matrix T = prev.row_cov, S = prev.col_cov;
  out.converged = false;
  for (int sweep = 1; sweep <= kInnerSweepCap; ++sweep) {
    Matrix denom_t = trace_product(rtr, S) * ltl;
    denom_t.diagonal().array() += sigma2 * S.trace();
    Matrix T_new = dc * sigma2 * SpdFactor(denom_t).inverse();
    T_new = 0.5 * (T_new + T_new.transpose()).eval();

    Matrix denom_s = trace_product(ltl, T_new) * rtr;
    denom_s.diagonal().array() += sigma2 * T_new.trace();
    Matrix S_new = dr * sigma2 * SpdFactor(denom_s).inverse();
    S_new = 0.5 * (S_new + S_new.transpose()).eval();

    const bool t_done = (T_new - T).norm() <= kInnerTol * std::max(1.0, T_new.norm());
    const bool s_done = (S_new - S).norm() <= kInnerTol * std::max(1.0, S_new.norm());
    T = std::move(T_new);
    S = std::move(S_new);
    out.sweeps = sweep;
    if (t_done && s_done) {
      out.converged = true;
      break;
    }
  }
  out.row_cov = std::move(T);
  out.col_cov = std::move(S);
  out.core_mean = stein_solve(ltl, rtr, sigma2, left.transpose() * (x - mean) * right);
  return out;
}

/// M-step for a single component: Eq-by-eq coordinate maximization with the
/// right-loading and noise moments recomputed at the fresh left loading.
void mstep_one(const SampleSet& data, const Responsibilities& gamma,
               const LatentPosterior& latent, MixtureParams& params, int k) {
  const auto N = data.size();
  const double pq = static_cast<double>(params.p * params.q);
  const Matrix R_old = params.right[k];
  const Matrix rtr_old = R_old.transpose() * R_old;
  const Matrix& M = params.mean[k];

  Matrix sum_xr = Matrix::Zero(params.p, params.r);
  Matrix sum_brb = Matrix::Zero(params.r, params.r);
  double nk = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double g = gamma.gamma(n, k);
    if (g == 0.0) continue;
    nk += g;
    const LatentEntry& e = latent.at(n, k);
    sum_xr.noalias() += g * (data.samples[n] - M) * R_old * e.core_mean.transpose();
    sum_brb.noalias() += g * (e.core_mean * rtr_old * e.core_mean.transpose() +
                              e.row_cov * trace_product(e.col_cov, rtr_old));
  }
  Matrix L_new;
  try {
    L_new = SpdFactor(0.5 * (sum_brb + sum_brb.transpose())).solve(sum_xr.transpose()).transpose();
  } catch (const NotPositiveDefiniteError&) {
    throw NumericalError("mstep: singular left moment sum for component " + std::to_string(k) +
                         " (core dims too large for effective cluster size " +
                         std::to_string(nk) + ")");
  }

  const Matrix ltl_new = L_new.transpose() * L_new;
  Matrix sum_xl = Matrix::Zero(params.q, params.c);
  Matrix sum_blb = Matrix::Zero(params.c, params.c);
  for (std::size_t n = 0; n < N; ++n) {
    const double g = gamma.gamma(n, k);
    if (g == 0.0) continue;
    const LatentEntry& e = latent.at(n, k);
    sum_xl.noalias() += g * (data.samples[n] - M).transpose() * L_new * e.core_mean;
    sum_blb.noalias() += g * (e.core_mean.transpose() * ltl_new * e.core_mean +
                              e.col_cov * trace_product(e.row_cov, ltl_new));
  }
  Matrix R_new;
  try {
    R_new = SpdFactor(0.5 * (sum_blb + sum_blb.transpose())).solve(sum_xl.transpose()).transpose();
  } catch (const NotPositiveDefiniteError&) {
    throw NumericalError("mstep: singular right moment sum for component " + std::to_string(k) +
                         " (core dims too large for effective cluster size " +
                         std::to_string(nk) + ")");
  }

  const Matrix rtr_new = R_new.transpose() * R_new;
  double s_data = 0.0, s_cross = 0.0, s_quad = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double g = gamma.gamma(n, k);
    if (g == 0.0) continue;
    const LatentEntry& e = latent.at(n, k);
    const Matrix diff = data.samples[n] - M;
    s_data += g * diff.squaredNorm();
    s_cross += g * (e.core_mean.cwiseProduct(L_new.transpose() * diff * R_new)).sum();
    const Matrix blb = e.core_mean.transpose() * ltl_new * e.core_mean +
                       e.col_cov * trace_product(e.row_cov, ltl_new);
    s_quad += g * trace_product(blb, rtr_new);
  }
  const double sigma2 = (s_data - 2.0 * s_cross + s_quad) / (pq * nk);

  params.left[k] = std::move(L_new);
  params.right[k] = std::move(R_new);
  params.noise[k] = std::max(sigma2, kSigma2Floor);
}

}  // namespace

LatentEntry update_latent(const Matrix& x, const MixtureParams& params, int k,
                          const LatentEntry& prev) {
  if (k < 0 || k >= params.K) {
    throw DimensionError("update_latent: component index out of range");
  }
  const Matrix& L = params.left[k];
  const Matrix& R = params.right[k];
  try {
    return update_latent_impl(x, params.mean[k], L, R, L.transpose() * L, R.transpose() * R,
                              params.noise[k], prev);
  } catch (const NotPositiveDefiniteError& err) {
    throw ComponentCollapseError(
        k, "update_latent: component " + std::to_string(k) + " collapsed: " + err.what());
  }
}

MomentEntry second_moments(const LatentEntry& entry, const Matrix& L, const Matrix& R) {
  const Matrix& Q = entry.core_mean;
  const Matrix& T = entry.row_cov;
  const Matrix& S = entry.col_cov;
  const Matrix ltl = L.transpose() * L;
  const Matrix rtr = R.transpose() * R;
  MomentEntry m;
  m.core_gram = Q.transpose() * Q + S * T.trace();
  m.core_gram_left = Q.transpose() * ltl * Q + S * trace_product(T, ltl);
  m.core_gram_right = Q * rtr * Q.transpose() + T * trace_product(S, rtr);
  return m;
}

Responsibilities responsibilities(const SampleSet& data, const MixtureParams& params,
                                  int threads) {
  const auto N = data.size();
  const int K = params.K;
  std::vector<ComponentMarginal> comps;
  comps.reserve(K);
  for (int k = 0; k < K; ++k) {
    comps.emplace_back(params.mean[k], params.left[k], params.right[k], params.noise[k]);
  }
  Vector logw(K);
  for (int k = 0; k < K; ++k) logw(k) = std::log(params.weight[k]);

  Responsibilities resp;
  resp.gamma.resize(N, K);
  Eigen::MatrixXd logp(N, K);
  parallel_for(N, threads, [&](std::size_t n) {
    for (int k = 0; k < K; ++k) {
      logp(n, k) = logw(k) + comps[k].loglik(data.samples[n]);
    }
  });
  for (std::size_t n = 0; n < N; ++n) {
    const double m = logp.row(n).maxCoeff();
    if (!std::isfinite(m)) {
      throw NumericalError(
          "responsibilities: all components have vanishing likelihood for sample " +
          std::to_string(n));
    }
    const double lse = m + std::log((logp.row(n).array() - m).exp().sum());
    resp.gamma.row(n) = (logp.row(n).array() - lse).exp();
  }
  return resp;
}

std::vector<int> update_pi_means(const SampleSet& data, const Responsibilities& gamma,
                                 MixtureParams& params) {
  const auto N = data.size();
  const int K = params.K;
  if (gamma.gamma.rows() != static_cast<Index>(N) || gamma.gamma.cols() != K) {
    throw DimensionError("update_pi_means: responsibility shape mismatch");
  }
  std::vector<int> dead;
  for (int k = 0; k < K; ++k) {
    const double nk = gamma.gamma.col(k).sum();
    params.weight[k] = nk / static_cast<double>(N);
    if (nk < kDeadFraction * static_cast<double>(N)) {
      dead.push_back(k);
      continue;
    }
    Matrix m = Matrix::Zero(params.p, params.q);
    for (std::size_t n = 0; n < N; ++n) {
      m.noalias() += gamma.gamma(n, k) * data.samples[n];
    }
    params.mean[k] = m / nk;
  }
  return dead;
}

void mstep(const SampleSet& data, const Responsibilities& gamma, const LatentPosterior& latent,
           MixtureParams& params) {
  for (int k = 0; k < params.K; ++k) {
    mstep_one(data, gamma, latent, params, k);
  }
}

double expected_loglik(const SampleSet& data, const Responsibilities& gamma,
                       const LatentPosterior& latent, const MixtureParams& params) {
  const auto N = data.size();
  const int K = params.K;
  const double half_pq = 0.5 * static_cast<double>(params.p * params.q);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const Matrix& L = params.left[k];
    const Matrix& R = params.right[k];
    const Matrix ltl = L.transpose() * L;
    const Matrix rtr = R.transpose() * R;
    const double sigma2 = params.noise[k];
    const double log_sigma2 = std::log(sigma2);
    const double log_w = std::log(params.weight[k]);
    for (std::size_t n = 0; n < N; ++n) {
      const double g = gamma.gamma(n, k);
      if (g == 0.0) continue;
      const LatentEntry& e = latent.at(n, k);
      const Matrix diff = data.samples[n] - params.mean[k];
      const double tr_gram = e.core_mean.squaredNorm() + e.col_cov.trace() * e.row_cov.trace();
      const double cross = (e.core_mean.cwiseProduct(L.transpose() * diff * R)).sum();
      const Matrix blb = e.core_mean.transpose() * ltl * e.core_mean +
                         e.col_cov * trace_product(e.row_cov, ltl);
      const double quad = trace_product(blb, rtr);
      total += g * (log_w - half_pq * log_sigma2 - 0.5 * tr_gram -
                    0.5 * diff.squaredNorm() / sigma2 + cross / sigma2 - 0.5 * quad / sigma2);
    }
  }
  return total;
}

Matrix reconstruct(const MixtureParams& params, const LatentPosterior& latent,
                   const Responsibilities& gamma, std::size_t n) {
  const int k = gamma.argmax(n);
  return params.left[k] * latent.at(n, k).core_mean * params.right[k].transpose() +
         params.mean[k];
}

Matrix reconstruct(const MixtureParams& params, const Projection& proj) {
  const int k = proj.assigned;
  return params.left[k] * proj.cores[k] * params.right[k].transpose() + params.mean[k];
}

Projection project_new(const Matrix& x, const MixtureParams& params) {
  if (x.rows() != params.p || x.cols() != params.q) {
    throw DimensionError("project_new: sample shape does not match model");
  }
  const int K = params.K;
  Projection proj;
  proj.cores.reserve(K);
  Vector logp(K);
  for (int k = 0; k < K; ++k) {
    const Matrix& L = params.left[k];
    const Matrix& R = params.right[k];
    proj.cores.push_back(stein_solve(L.transpose() * L, R.transpose() * R, params.noise[k],
                                     L.transpose() * (x - params.mean[k]) * R));
    ComponentMarginal comp(params.mean[k], L, R, params.noise[k]);
    logp(k) = std::log(params.weight[k]) + comp.loglik(x);
  }
  const double m = logp.maxCoeff();
  if (!std::isfinite(m)) {
    throw NumericalError("project_new: all components have vanishing likelihood");
  }
  const double lse = m + std::log((logp.array() - m).exp().sum());
  proj.gamma = (logp.array() - lse).exp();
  proj.assigned = 0;
  for (int k = 1; k < K; ++k) {
    if (proj.gamma(k) > proj.gamma(proj.assigned)) proj.assigned = k;
  }
  return proj;
}

double avg_recon_error(const SampleSet& data, const std::vector<Matrix>& reconstructions) {
  if (data.size() != reconstructions.size()) {
    throw DimensionError("avg_recon_error: sample/reconstruction count mismatch");
  }
  double total = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    total += (data.samples[n] - reconstructions[n]).squaredNorm();
  }
  return std::sqrt(total / static_cast<double>(data.size()));
}

namespace {

class Fitter {
 public:
  Fitter(const SampleSet& data, const FitConfig& config)
      : data_(data),
        config_(config),
        rescue_rng_(config.seed ^ 0x9E3779B97F4A7C15ull),
        rescue_count_(config.K, 0) {}

  FitResult run() {
    data_.validate();
    if (config_.max_iters < 1) throw DimensionError("fit: max_iters must be >= 1");
    if (!(config_.epsilon > 0.0)) throw DimensionError("fit: epsilon must be positive");

    result_.params = init_params(data_, config_.K, config_.r, config_.c, config_.seed);
    result_.latent = LatentPosterior(data_.size(), config_.K, config_.r, config_.c);

    double prev_error = std::numeric_limits<double>::quiet_NaN();
    for (int t = 1; t <= config_.max_iters; ++t) {
      const auto started = std::chrono::steady_clock::now();
      iter_reinits_ = 0;

      refresh_latent();
      result_.gamma = responsibilities(data_, result_.params, config_.threads);
      for (int k : update_pi_means(data_, result_.gamma, result_.params)) {
        rescue(k);
      }
      run_mstep();

      IterationStats stats;
      stats.t = t;
      stats.recon_error = current_recon_error();
      stats.expected_loglik =
          expected_loglik(data_, result_.gamma, result_.latent, result_.params);
      const Vector counts = result_.gamma.component_counts();
      stats.component_counts.assign(counts.data(), counts.data() + counts.size());
      stats.latent_nonconverged = latent_nonconverged_;
      stats.reinits = iter_reinits_;
      stats.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
              .count();
      result_.trace.push_back(std::move(stats));

      const double err = result_.trace.back().recon_error;
      if (t >= 2 && std::abs(prev_error - err) <= config_.epsilon) break;
      prev_error = err;
    }

    // Final refresh keeps the returned latent state and responsibilities
    // consistent with the final parameters, so project_new on a training
    // sample reproduces its stored cores exactly.
    refresh_latent();
    result_.gamma = responsibilities(data_, result_.params, config_.threads);
    return std::move(result_);
  }

 private:
  void refresh_latent() {
    for (;;) {
      try {
        attempt_latent();
        return;
      } catch (const ComponentCollapseError& err) {
        rescue(err.component());
      }
    }
  }

  void attempt_latent() {
    const int K = config_.K;
    std::vector<Matrix> ltl(K), rtr(K);
    for (int k = 0; k < K; ++k) {
      ltl[k] = result_.params.left[k].transpose() * result_.params.left[k];
      rtr[k] = result_.params.right[k].transpose() * result_.params.right[k];
    }
    std::vector<int> nonconverged(data_.size(), 0);
    parallel_for(data_.size(), config_.threads, [&](std::size_t n) {
      for (int k = 0; k < K; ++k) {
        try {
          result_.latent.at(n, k) = update_latent_impl(
              data_.samples[n], result_.params.mean[k], result_.params.left[k],
              result_.params.right[k], ltl[k], rtr[k], result_.params.noise[k],
              result_.latent.at(n, k));
        } catch (const NotPositiveDefiniteError& err) {
          throw ComponentCollapseError(k, "fit: component " + std::to_string(k) +
                                              " collapsed during latent update: " + err.what());
        }
        if (!result_.latent.at(n, k).converged) ++nonconverged[n];
      }
    });
    latent_nonconverged_ = 0;
    for (int v : nonconverged) latent_nonconverged_ += v;
  }

  void run_mstep() {
    // Components rescued earlier in this iteration keep their fresh random
    // parameters; their responsibility column is stale (near zero).
    for (int k = 0; k < config_.K; ++k) {
      if (rescued_this_iter_.count(k)) continue;
      try {
        mstep_one(data_, result_.gamma, result_.latent, result_.params, k);
      } catch (const NumericalError&) {
        rescue(k);
      }
    }
    rescued_this_iter_.clear();
  }

  double current_recon_error() const {
    double total = 0.0;
    for (std::size_t n = 0; n < data_.size(); ++n) {
      total +=
          (data_.samples[n] - reconstruct(result_.params, result_.latent, result_.gamma, n))
              .squaredNorm();
    }
    return std::sqrt(total / static_cast<double>(data_.size()));
  }

  void rescue(int k) {
    if (rescue_count_[k] >= config_.rescue_budget) {
      throw NumericalError("fit: component " + std::to_string(k) + " collapsed after " +
                           std::to_string(config_.rescue_budget) + " reinitializations");
    }
    ++rescue_count_[k];
    ++iter_reinits_;
    ++result_.total_reinits;
    rescued_this_iter_.insert(k);

    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    result_.params.mean[k] = data_.samples[pick(rescue_rng_)];
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index i = 0; i < result_.params.left[k].rows(); ++i)
      for (Index j = 0; j < result_.params.left[k].cols(); ++j)
        result_.params.left[k](i, j) = gauss(rescue_rng_);
    for (Index i = 0; i < result_.params.right[k].rows(); ++i)
      for (Index j = 0; j < result_.params.right[k].cols(); ++j)
        result_.params.right[k](i, j) = gauss(rescue_rng_);
    result_.params.noise[k] = 1.0;
    result_.params.weight[k] = 1.0 / config_.K;
    double total = 0.0;
    for (double w : result_.params.weight) total += w;
    for (double& w : result_.params.weight) w /= total;
    for (std::size_t n = 0; n < data_.size(); ++n) {
      LatentEntry& e = result_.latent.at(n, k);
      e.core_mean.setZero();
      e.row_cov = Matrix::Identity(config_.r, config_.r);
      e.col_cov = Matrix::Identity(config_.c, config_.c);
    }
  }

  const SampleSet& data_;
  FitConfig config_;
  FitResult result_;
  std::mt19937_64 rescue_rng_;
  std::vector<int> rescue_count_;
  std::set<int> rescued_this_iter_;
  int iter_reinits_ = 0;
  int latent_nonconverged_ = 0;
};

}  // namespace

FitResult fit(const SampleSet& data, const FitConfig& config) {
  Fitter fitter(data, config);
  return fitter.run();
}

}  // namespace mixb2d
