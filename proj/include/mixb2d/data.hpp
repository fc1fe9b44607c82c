#ifndef MIXB2D_DATA_HPP
#define MIXB2D_DATA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mixb2d/linalg.hpp"

namespace mixb2d {

/// N grayscale matrices of uniform size with values in [0,1], optional
/// integer labels (all-or-none) and source descriptor strings.
struct SampleSet {
  std::vector<Matrix> samples;
  std::vector<int> labels;
  std::vector<std::string> provenance;

  std::size_t size() const { return samples.size(); }
  bool has_labels() const { return !labels.empty(); }
  Index rows() const { return samples.empty() ? 0 : samples.front().rows(); }
  Index cols() const { return samples.empty() ? 0 : samples.front().cols(); }

  /// Checks uniform shape, finiteness, label coverage.
  void validate() const;
  /// validate() plus the [0,1] value range loaders guarantee.
  void validate_unit_range() const;
};

struct SplitSpec {
  enum class Mode { PerClassCount, FixedIndex };
  Mode mode = Mode::PerClassCount;
  int train_per_class = 1;
  /// Cap on test items per class; 0 keeps the whole remainder.
  int test_per_class = 0;
  std::uint64_t seed = 0;
};

/// Reads big-endian IDX files (image magic 0x803, label magic 0x801);
/// pixel bytes are scaled by 1/255.
SampleSet load_idx(const std::string& images_path, const std::string& labels_path = "");

/// Writes a SampleSet as IDX (values quantized to round(v*255)).
void save_idx(const SampleSet& set, const std::string& images_path,
              const std::string& labels_path = "");

/// 8-bit binary PGM (P5). Values are scaled by the file's maxval.
Matrix load_pgm(const std::string& path);
void save_pgm(const Matrix& image, const std::string& path);

/// Loads every PGM under root matching pattern (glob with * and ?), sorted
/// lexicographically. With label_from_subdir, the immediate subdirectory
/// name maps to an integer label in sorted-name order.
SampleSet load_image_dir(const std::string& root, const std::string& pattern = "*.pgm",
                         bool label_from_subdir = false);

/// Manifest ingestion: one "path,label" per line, paths relative to the
/// manifest's directory.
SampleSet load_manifest(const std::string& path);

/// Bilinear resize with corner-aligned sampling.
SampleSet resize(const SampleSet& set, Index new_rows, Index new_cols);

/// Label-stratified split. PerClassCount draws train_per_class per class
/// uniformly without replacement under seed; FixedIndex takes the first
/// train_per_class per class in file order.
std::pair<SampleSet, SampleSet> split(const SampleSet& set, const SplitSpec& spec);

}  // namespace mixb2d

#endif  // MIXB2D_DATA_HPP
