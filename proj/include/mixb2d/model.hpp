#ifndef MIXB2D_MODEL_HPP
#define MIXB2D_MODEL_HPP

#include <cstdint>
#include <vector>

#include "mixb2d/data.hpp"
#include "mixb2d/linalg.hpp"

namespace mixb2d {

/// Parameters of a K-component bilateral-projection 2D PPCA mixture:
/// per component a weight, a p x q mean, left (p x r) and right (q x c)
/// loading matrices, and an isotropic noise variance.
struct MixtureParams {
  Index p = 0, q = 0, r = 0, c = 0;
  int K = 0;
  std::vector<double> weight;
  std::vector<Matrix> mean;
  std::vector<Matrix> left;
  std::vector<Matrix> right;
  std::vector<double> noise;

  void validate() const;
};

/// Variational posterior of one sample's core under one component:
/// mean core (r x c) plus row/column covariances (r x r, c x c).
struct LatentEntry {
  Matrix core_mean;
  Matrix row_cov;
  Matrix col_cov;
  int sweeps = 0;        // inner fixed-point sweeps spent
  bool converged = true; // false if the sweep cap was hit
};

/// N x K grid of latent entries.
class LatentPosterior {
 public:
  LatentPosterior() = default;
  LatentPosterior(std::size_t n_samples, int n_components, Index r, Index c);

  LatentEntry& at(std::size_t n, int k) { return entries_[n * k_ + k]; }
  const LatentEntry& at(std::size_t n, int k) const { return entries_[n * k_ + k]; }
  std::size_t samples() const { return n_; }
  int components() const { return k_; }

 private:
  std::size_t n_ = 0;
  int k_ = 0;
  std::vector<LatentEntry> entries_;
};

/// Posterior component probabilities, one row per sample, rows sum to 1.
struct Responsibilities {
  Eigen::MatrixXd gamma;

  Vector component_counts() const { return gamma.colwise().sum(); }
  /// Most responsible component for sample n; ties go to the lowest index.
  int argmax(std::size_t n) const;
};

/// Second-order expectations of one latent entry.
struct MomentEntry {
  Matrix core_gram;        // <B^T B>,        c x c
  Matrix core_gram_left;   // <B^T L^T L B>,  c x c
  Matrix core_gram_right;  // <B R^T R B^T>,  r x r
};

struct FitConfig {
  int K = 1;
  Index r = 1, c = 1;
  int max_iters = 50;
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
  int threads = 1;
  int rescue_budget = 3;  // reinitializations allowed per component
};

struct IterationStats {
  int t = 0;
  double recon_error = 0.0;
  double expected_loglik = 0.0;
  std::vector<double> component_counts;
  int latent_nonconverged = 0;  // (n,k) entries whose inner loop hit the cap
  int reinits = 0;              // component rescues this iteration
  double wall_ms = 0.0;
};

struct FitResult {
  MixtureParams params;
  LatentPosterior latent;
  Responsibilities gamma;
  std::vector<IterationStats> trace;
  int total_reinits = 0;
};

/// New-sample projection: per-component posterior mean cores, posterior
/// component probabilities, and the argmax assignment.
struct Projection {
  std::vector<Matrix> cores;
  Vector gamma;
  int assigned = 0;
};

/// A latent-update failure tied to one component (collapsed loadings).
class ComponentCollapseError : public NumericalError {
 public:
  ComponentCollapseError(int component, const std::string& msg)
      : NumericalError(msg), component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

/// Weights 1/K, means drawn as K distinct samples, standard-normal loadings,
/// all noise variances 1. Deterministic under seed.
MixtureParams init_params(const SampleSet& data, int K, Index r, Index c, std::uint64_t seed);

/// One E-step latent refresh for sample x under component k: alternates the
/// row/column covariance fixed-point updates (warm-started from prev) until
/// relative change < 1e-8 or 50 sweeps, then solves the core equation
/// L^T L Q R^T R + sigma2 Q = L^T (x - M) R.
LatentEntry update_latent(const Matrix& x, const MixtureParams& params, int k,
                          const LatentEntry& prev);

MomentEntry second_moments(const LatentEntry& entry, const Matrix& L, const Matrix& R);

Responsibilities responsibilities(const SampleSet& data, const MixtureParams& params,
                                  int threads = 1);

/// Updates weights and means in place from the responsibilities; returns the
/// indices of dead components (N_k < 1e-8 N), whose parameters are left alone.
std::vector<int> update_pi_means(const SampleSet& data, const Responsibilities& gamma,
                                 MixtureParams& params);

/// M-step: per component, the left loading from the responsibility-weighted
/// normal equations, then the right loading with moments recomputed at the
/// fresh left loading, then the noise variance (floored at 1e-10).
void mstep(const SampleSet& data, const Responsibilities& gamma, const LatentPosterior& latent,
           MixtureParams& params);

/// Expected complete-data log-likelihood under the variational posterior,
/// evaluated term by term from the current latent entries and parameters.
double expected_loglik(const SampleSet& data, const Responsibilities& gamma,
                       const LatentPosterior& latent, const MixtureParams& params);

/// Variational EM training loop. Stops at max_iters or when consecutive
/// average reconstruction errors differ by at most epsilon. After the loop
/// the latent posterior and responsibilities are refreshed once under the
/// final parameters so the returned state is mutually consistent.
FitResult fit(const SampleSet& data, const FitConfig& config);

/// Reconstruction through the most responsible component:
/// L_k' Q_n^(k') R_k'^T + M_k'.
Matrix reconstruct(const MixtureParams& params, const LatentPosterior& latent,
                   const Responsibilities& gamma, std::size_t n);
Matrix reconstruct(const MixtureParams& params, const Projection& proj);

Projection project_new(const Matrix& x, const MixtureParams& params);

/// sqrt(sum_n ||X_n - Xhat_n||_F^2 / N)
double avg_recon_error(const SampleSet& data, const std::vector<Matrix>& reconstructions);

}  // namespace mixb2d

#endif  // MIXB2D_MODEL_HPP
