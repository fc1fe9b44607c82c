#ifndef MIXB2D_EVAL_HPP
#define MIXB2D_EVAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixb2d/baselines.hpp"
#include "mixb2d/data.hpp"
#include "mixb2d/model.hpp"

namespace mixb2d {

/// Per-sample feature: one core matrix per mixture component.
using FeatureCores = std::vector<Matrix>;

/// Summed per-component Frobenius distance between two feature stacks.
double feature_distance(const FeatureCores& a, const FeatureCores& b);

/// Footnote variant: each per-component distance weighted by the product of
/// the two samples' posterior probabilities for that component.
double feature_distance_weighted(const FeatureCores& a, const FeatureCores& b, const Vector& ga,
                                 const Vector& gb);

/// Label of the training item with the smallest feature distance; ties go to
/// the lowest training index. With weighted set, gammas must be provided.
int one_nn_classify(const std::vector<FeatureCores>& train_features,
                    const std::vector<int>& train_labels, const FeatureCores& query,
                    bool weighted = false,
                    const std::vector<Vector>* train_gammas = nullptr,
                    const Vector* query_gamma = nullptr);

enum class ModelKind { MixB2dppca, Glram, MixPpca };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct RecognitionOptions {
  int trials = 10;
  std::uint64_t seed_base = 0;
  int max_iters = 50;
  double epsilon = 1e-3;
  bool weighted_distance = false;
  bool glram_center = true;
  int threads = 1;
  std::optional<Index> mixppca_d;  // defaults to r*c
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double train_recon_error = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
};

struct RecognitionResult {
  ModelKind kind = ModelKind::MixB2dppca;
  int K = 0;
  Index r = 0, c = 0;
  std::vector<TrialRecord> trials;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation over trials
};

/// Paper-style recognition protocol: per trial, split, fit on train, extract
/// per-component feature cores for train and test, classify test by 1-NN,
/// aggregate mean and standard deviation over trials. Trial i uses
/// seed_base + i for both the split and the fit.
RecognitionResult run_recognition(const SampleSet& dataset, const SplitSpec& split_spec,
                                  ModelKind kind, int K, Index r, Index c,
                                  const RecognitionOptions& opts);

/// Ground-truth generator for the bilateral-projection mixture model.
struct SyntheticSpec {
  int K = 1;
  Index p = 1, q = 1, r = 1, c = 1;
  std::vector<double> weight;
  std::vector<Matrix> mean;
  std::vector<Matrix> left;
  std::vector<Matrix> right;
  std::vector<double> noise;  // sigma2 per component, >= 0
  std::size_t count = 0;
  std::uint64_t seed = 0;
  bool zero_cores = false;  // degenerate mode: force B = 0
};

struct SyntheticData {
  SampleSet set;
  std::vector<int> assignments;
};

/// Draws z ~ weights, B ~ N(0, I, I), X = L B R^T + M + noise with i.i.d.
/// N(0, sigma2) entries. Deterministic under seed.
SyntheticData synth_generate(const SyntheticSpec& spec);

/// Best accuracy over all label permutations (exhaustive, K <= 8).
double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                           int K);

}  // namespace mixb2d

#endif  // MIXB2D_EVAL_HPP
