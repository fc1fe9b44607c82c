#ifndef MIXB2D_BASELINES_HPP
#define MIXB2D_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "mixb2d/data.hpp"
#include "mixb2d/linalg.hpp"

namespace mixb2d {

/// Generalized low rank approximation of matrices: shared orthonormal
/// left/right factors with one small core per sample.
struct GlramModel {
  Matrix mean;   // p x q global mean (zero when fit uncentered)
  Matrix left;   // p x r, orthonormal columns
  Matrix right;  // q x c, orthonormal columns
  std::vector<Matrix> cores;      // N of r x c
  std::vector<double> objective;  // sum ||X - L B R^T||_F^2 after each half-step
  bool centered = true;

  Matrix reconstruct(std::size_t n) const;
  Matrix core_of(const Matrix& x) const { return left.transpose() * (x - mean) * right; }
};

/// Alternating eigendecomposition fit. The right factor starts as the first
/// c columns of the identity, which makes the baseline fully deterministic.
GlramModel glram_fit(const SampleSet& data, Index r, Index c, int iters, bool center = true);

/// Mixture of probabilistic PCA over vectorized samples.
struct MixPpcaModel {
  Index dim = 0;  // pq
  Index d = 0;    // latent dimension
  int K = 0;
  Index p = 0, q = 0;  // original image shape, kept for reconstruction output
  std::vector<double> weight;
  std::vector<Vector> mean;      // dim
  std::vector<Matrix> loading;   // dim x d
  std::vector<double> noise;     // sigma2
  std::vector<double> loglik_trace;  // data log-likelihood at the start of each iteration
  std::vector<double> recon_trace;   // average reconstruction error per iteration
  int total_reinits = 0;

  /// Per-component posterior latent means for one (vectorized) sample.
  std::vector<Vector> features(const Vector& x) const;
  /// Posterior component probabilities for one sample.
  Vector posterior(const Vector& x) const;
  /// Reconstruction through the most responsible component.
  Vector reconstruct(const Vector& x) const;
};

struct MixPpcaConfig {
  int K = 1;
  Index d = 1;
  int max_iters = 50;
  std::uint64_t seed = 0;
  int rescue_budget = 3;
  bool track_recon = false;  // per-iteration reconstruction errors (costly)
};

MixPpcaModel mixppca_fit(const SampleSet& data, const MixPpcaConfig& config);

}  // namespace mixb2d

#endif  // MIXB2D_BASELINES_HPP
