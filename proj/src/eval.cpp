#include "mixb2d/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace mixb2d {

double feature_distance(const FeatureCores& a, const FeatureCores& b) {
  if (a.size() != b.size()) {
    throw DimensionError("feature_distance: component counts differ");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].rows() != b[k].rows() || a[k].cols() != b[k].cols()) {
      throw DimensionError("feature_distance: core shapes differ at component " +
                           std::to_string(k));
    }
    total += (a[k] - b[k]).norm();
  }
  return total;
}

double feature_distance_weighted(const FeatureCores& a, const FeatureCores& b, const Vector& ga,
                                 const Vector& gb) {
  if (a.size() != b.size() || ga.size() != gb.size() ||
      static_cast<std::size_t>(ga.size()) != a.size()) {
    throw DimensionError("feature_distance_weighted: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    total += ga(k) * gb(k) * (a[k] - b[k]).norm();
  }
  return total;
}

int one_nn_classify(const std::vector<FeatureCores>& train_features,
                    const std::vector<int>& train_labels, const FeatureCores& query,
                    bool weighted, const std::vector<Vector>* train_gammas,
                    const Vector* query_gamma) {
  if (train_features.empty()) {
    throw DimensionError("one_nn_classify: empty training set");
  }
  if (train_features.size() != train_labels.size()) {
    throw DimensionError("one_nn_classify: feature/label count mismatch");
  }
  if (weighted && (train_gammas == nullptr || query_gamma == nullptr)) {
    throw DimensionError("one_nn_classify: weighted distance needs posteriors");
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train_features.size(); ++i) {
    const double d = weighted
                         ? feature_distance_weighted(train_features[i], query,
                                                     (*train_gammas)[i], *query_gamma)
                         : feature_distance(train_features[i], query);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return train_labels[best];
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MixB2dppca: return "mixb2dppca";
    case ModelKind::Glram: return "glram";
    case ModelKind::MixPpca: return "mixppca";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "mixb2dppca") return ModelKind::MixB2dppca;
  if (name == "glram") return ModelKind::Glram;
  if (name == "mixppca") return ModelKind::MixPpca;
  throw DimensionError("unknown model kind: " + name);
}

namespace {

// Extracted features for one dataset half under one fitted model.
struct Extracted {
  std::vector<FeatureCores> cores;
  std::vector<Vector> gammas;
};

Extracted extract_mixb2d(const FitResult& fitted, const SampleSet& train, const SampleSet* test) {
  Extracted out;
  if (test == nullptr) {
    out.cores.reserve(train.size());
    out.gammas.reserve(train.size());
    for (std::size_t n = 0; n < train.size(); ++n) {
      FeatureCores fc;
      fc.reserve(fitted.params.K);
      for (int k = 0; k < fitted.params.K; ++k) fc.push_back(fitted.latent.at(n, k).core_mean);
      out.cores.push_back(std::move(fc));
      out.gammas.push_back(fitted.gamma.gamma.row(n).transpose());
    }
  } else {
    out.cores.reserve(test->size());
    out.gammas.reserve(test->size());
    for (const Matrix& x : test->samples) {
      Projection proj = project_new(x, fitted.params);
      out.cores.push_back(std::move(proj.cores));
      out.gammas.push_back(std::move(proj.gamma));
    }
  }
  return out;
}

Extracted extract_glram(const GlramModel& model, const SampleSet& set) {
  Extracted out;
  out.cores.reserve(set.size());
  out.gammas.reserve(set.size());
  for (const Matrix& x : set.samples) {
    out.cores.push_back({model.core_of(x)});
    out.gammas.push_back(Vector::Ones(1));
  }
  return out;
}

Extracted extract_mixppca(const MixPpcaModel& model, const SampleSet& set) {
  Extracted out;
  out.cores.reserve(set.size());
  out.gammas.reserve(set.size());
  for (const Matrix& x : set.samples) {
    const Vector v = vec(x);
    FeatureCores fc;
    fc.reserve(model.K);
    for (Vector& z : model.features(v)) {
      fc.push_back(Eigen::Map<Matrix>(z.data(), z.size(), 1));
    }
    out.cores.push_back(std::move(fc));
    out.gammas.push_back(model.posterior(v));
  }
  return out;
}

}  // namespace

RecognitionResult run_recognition(const SampleSet& dataset, const SplitSpec& split_spec,
                                  ModelKind kind, int K, Index r, Index c,
                                  const RecognitionOptions& opts) {
  if (!dataset.has_labels()) {
    throw DataError("run_recognition: labeled dataset required");
  }
  if (opts.trials < 1) {
    throw DimensionError("run_recognition: trials must be >= 1");
  }
  RecognitionResult result;
  result.kind = kind;
  result.K = K;
  result.r = r;
  result.c = c;

  for (int trial = 0; trial < opts.trials; ++trial) {
    const std::uint64_t seed = opts.seed_base + static_cast<std::uint64_t>(trial);
    SplitSpec spec = split_spec;
    spec.seed = seed;
    auto [train, test] = split(dataset, spec);

    const auto started = std::chrono::steady_clock::now();
    Extracted train_feat, test_feat;
    TrialRecord record;
    record.trial = trial;
    record.seed = seed;

    switch (kind) {
      case ModelKind::MixB2dppca: {
        FitConfig cfg;
        cfg.K = K;
        cfg.r = r;
        cfg.c = c;
        cfg.max_iters = opts.max_iters;
        cfg.epsilon = opts.epsilon;
        cfg.seed = seed;
        cfg.threads = opts.threads;
        FitResult fitted = fit(train, cfg);
        record.iterations = static_cast<int>(fitted.trace.size());
        record.train_recon_error = fitted.trace.empty() ? 0.0 : fitted.trace.back().recon_error;
        train_feat = extract_mixb2d(fitted, train, nullptr);
        test_feat = extract_mixb2d(fitted, train, &test);
        break;
      }
      case ModelKind::Glram: {
        GlramModel model = glram_fit(train, r, c, opts.max_iters, opts.glram_center);
        record.iterations = opts.max_iters;
        {
          std::vector<Matrix> recon;
          recon.reserve(train.size());
          for (std::size_t n = 0; n < train.size(); ++n) recon.push_back(model.reconstruct(n));
          record.train_recon_error = avg_recon_error(train, recon);
        }
        train_feat = extract_glram(model, train);
        test_feat = extract_glram(model, test);
        break;
      }
      case ModelKind::MixPpca: {
        MixPpcaConfig cfg;
        cfg.K = K;
        cfg.d = opts.mixppca_d.value_or(r * c);
        cfg.max_iters = opts.max_iters;
        cfg.seed = seed;
        MixPpcaModel model = mixppca_fit(train, cfg);
        record.iterations = opts.max_iters;
        {
          double total = 0.0;
          for (const Matrix& x : train.samples) {
            const Vector v = vec(x);
            total += (v - model.reconstruct(v)).squaredNorm();
          }
          record.train_recon_error = std::sqrt(total / static_cast<double>(train.size()));
        }
        train_feat = extract_mixppca(model, train);
        test_feat = extract_mixppca(model, test);
        break;
      }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const int label = one_nn_classify(train_feat.cores, train.labels, test_feat.cores[i],
                                        opts.weighted_distance, &train_feat.gammas,
                                        &test_feat.gammas[i]);
      if (label == test.labels[i]) ++correct;
    }
    record.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    result.trials.push_back(record);
  }

  double mean = 0.0;
  for (const TrialRecord& t : result.trials) mean += t.accuracy;
  mean /= static_cast<double>(result.trials.size());
  double var = 0.0;
  for (const TrialRecord& t : result.trials) {
    var += (t.accuracy - mean) * (t.accuracy - mean);
  }
  var /= static_cast<double>(result.trials.size());
  result.mean_accuracy = mean;
  result.std_accuracy = std::sqrt(var);
  return result;
}

SyntheticData synth_generate(const SyntheticSpec& spec) {
  if (spec.K < 1 || static_cast<int>(spec.weight.size()) != spec.K ||
      static_cast<int>(spec.mean.size()) != spec.K ||
      static_cast<int>(spec.left.size()) != spec.K ||
      static_cast<int>(spec.right.size()) != spec.K ||
      static_cast<int>(spec.noise.size()) != spec.K) {
    throw DimensionError("synth_generate: inconsistent component count");
  }
  double wsum = 0.0;
  for (double w : spec.weight) {
    if (w < 0.0) throw DimensionError("synth_generate: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw DimensionError("synth_generate: weights must sum to 1");
  }
  for (double s : spec.noise) {
    if (s < 0.0) throw DimensionError("synth_generate: negative noise variance");
  }

  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<int> pick_z(spec.weight.begin(), spec.weight.end());
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticData out;
  out.set.samples.reserve(spec.count);
  out.assignments.reserve(spec.count);
  out.set.provenance.push_back("synthetic:K=" + std::to_string(spec.K) +
                               ",seed=" + std::to_string(spec.seed));
  for (std::size_t n = 0; n < spec.count; ++n) {
    const int z = pick_z(rng);
    Matrix core = Matrix::Zero(spec.r, spec.c);
    if (!spec.zero_cores) {
      for (Index i = 0; i < spec.r; ++i)
        for (Index j = 0; j < spec.c; ++j) core(i, j) = gauss(rng);
    }
    Matrix x = spec.left[z] * core * spec.right[z].transpose() + spec.mean[z];
    const double noise_std = std::sqrt(spec.noise[z]);
    if (noise_std > 0.0) {
      for (Index i = 0; i < spec.p; ++i)
        for (Index j = 0; j < spec.q; ++j) x(i, j) += noise_std * gauss(rng);
    }
    out.set.samples.push_back(std::move(x));
    out.assignments.push_back(z);
  }
  return out;
}

double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                           int K) {
  if (predicted.size() != truth.size()) {
    throw DimensionError("clustering_accuracy: length mismatch");
  }
  if (K < 1 || K > 8) {
    throw DimensionError("clustering_accuracy: exhaustive matching supports 1 <= K <= 8");
  }
  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    std::size_t hits = 0;
    for (std::size_t n = 0; n < predicted.size(); ++n) {
      const int p = predicted[n];
      if (p < 0 || p >= K || truth[n] < 0 || truth[n] >= K) {
        throw DimensionError("clustering_accuracy: label out of range at index " +
                             std::to_string(n));
      }
      if (perm[p] == truth[n]) ++hits;
    }
    best = std::max(best, static_cast<double>(hits) / static_cast<double>(predicted.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace mixb2d
