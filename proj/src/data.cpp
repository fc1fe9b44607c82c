#include "mixb2d/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace mixb2d {

void SampleSet::validate() const {
  if (samples.empty()) {
    throw DataError("SampleSet: empty");
  }
  const Index p = rows(), q = cols();
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const Matrix& x = samples[n];
    if (x.rows() != p || x.cols() != q) {
      throw DataError("SampleSet: sample " + std::to_string(n) + " has inconsistent shape");
    }
    if (!x.allFinite()) {
      throw DataError("SampleSet: sample " + std::to_string(n) + " has non-finite values");
    }
  }
  if (!labels.empty() && labels.size() != samples.size()) {
    throw DataError("SampleSet: labels cover " + std::to_string(labels.size()) + " of " +
                    std::to_string(samples.size()) + " samples");
  }
}

void SampleSet::validate_unit_range() const {
  validate();
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (samples[n].minCoeff() < 0.0 || samples[n].maxCoeff() > 1.0) {
      throw DataError("SampleSet: sample " + std::to_string(n) + " has values outside [0,1]");
    }
  }
}

namespace {

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError(path + ": truncated file");
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

SampleSet load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream in(images_path, std::ios::binary);
  if (!in) {
    throw DataError(images_path + ": cannot open");
  }
  if (read_u32_be(in, images_path) != 0x00000803u) {
    throw DataError(images_path + ": bad magic (expected IDX image magic 0x00000803)");
  }
  const std::uint32_t count = read_u32_be(in, images_path);
  const std::uint32_t rows = read_u32_be(in, images_path);
  const std::uint32_t cols = read_u32_be(in, images_path);

  SampleSet set;
  set.samples.reserve(count);
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t n = 0; n < count; ++n) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw DataError(images_path + ": truncated at image " + std::to_string(n));
    }
    Matrix x(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) {
        x(i, j) = buf[static_cast<std::size_t>(i) * cols + j] / 255.0;
      }
    }
    set.samples.push_back(std::move(x));
  }
  set.provenance.push_back("idx:" + images_path);

  if (!labels_path.empty()) {
    std::ifstream lin(labels_path, std::ios::binary);
    if (!lin) {
      throw DataError(labels_path + ": cannot open");
    }
    if (read_u32_be(lin, labels_path) != 0x00000801u) {
      throw DataError(labels_path + ": bad magic (expected IDX label magic 0x00000801)");
    }
    const std::uint32_t lcount = read_u32_be(lin, labels_path);
    if (lcount != count) {
      throw DataError(labels_path + ": label count " + std::to_string(lcount) +
                      " does not match image count " + std::to_string(count));
    }
    set.labels.resize(lcount);
    for (std::uint32_t n = 0; n < lcount; ++n) {
      char b;
      if (!lin.get(b)) {
        throw DataError(labels_path + ": truncated at label " + std::to_string(n));
      }
      set.labels[n] = static_cast<unsigned char>(b);
    }
    set.provenance.push_back("idx-labels:" + labels_path);
  }
  return set;
}

void save_idx(const SampleSet& set, const std::string& images_path,
              const std::string& labels_path) {
  std::ofstream out(images_path, std::ios::binary);
  if (!out) {
    throw DataError(images_path + ": cannot open for writing");
  }
  write_u32_be(out, 0x00000803u);
  write_u32_be(out, static_cast<std::uint32_t>(set.size()));
  write_u32_be(out, static_cast<std::uint32_t>(set.rows()));
  write_u32_be(out, static_cast<std::uint32_t>(set.cols()));
  for (const Matrix& x : set.samples) {
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) {
        const double v = std::clamp(std::round(x(i, j) * 255.0), 0.0, 255.0);
        out.put(static_cast<char>(static_cast<unsigned char>(v)));
      }
    }
  }
  if (!labels_path.empty()) {
    if (!set.has_labels()) {
      throw DataError("save_idx: set has no labels");
    }
    std::ofstream lout(labels_path, std::ios::binary);
    if (!lout) {
      throw DataError(labels_path + ": cannot open for writing");
    }
    write_u32_be(lout, 0x00000801u);
    write_u32_be(lout, static_cast<std::uint32_t>(set.labels.size()));
    for (int lab : set.labels) {
      lout.put(static_cast<char>(static_cast<unsigned char>(lab)));
    }
  }
}

namespace {

// Skips PGM whitespace and '#' comments, then parses a decimal token.
int pgm_token(std::istream& in, const std::string& path) {
  int ch = in.get();
  while (ch != EOF && (std::isspace(ch) || ch == '#')) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    }
    ch = in.get();
  }
  if (ch == EOF || !std::isdigit(ch)) {
    throw DataError(path + ": malformed PGM header");
  }
  int value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    ch = in.get();
  }
  return value;
}

}  // namespace

Matrix load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') {
    throw DataError(path + ": not a binary PGM (P5) file");
  }
  const int width = pgm_token(in, path);
  const int height = pgm_token(in, path);
  const int maxval = pgm_token(in, path);
  if (maxval <= 0 || maxval > 255) {
    throw DataError(path + ": only 8-bit PGM supported (maxval " + std::to_string(maxval) + ")");
  }
  std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw DataError(path + ": truncated pixel data");
  }
  Matrix x(height, width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      x(i, j) = buf[static_cast<std::size_t>(i) * width + j] / static_cast<double>(maxval);
    }
  }
  return x;
}

void save_pgm(const Matrix& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError(path + ": cannot open for writing");
  }
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (Index i = 0; i < image.rows(); ++i) {
    for (Index j = 0; j < image.cols(); ++j) {
      const double v = std::clamp(std::round(image(i, j) * 255.0), 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
}

namespace {

bool glob_match(const std::string& pattern, const std::string& name) {
  std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

}  // namespace

SampleSet load_image_dir(const std::string& root, const std::string& pattern,
                         bool label_from_subdir) {
  if (!fs::exists(root)) {
    throw DataError(root + ": directory does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && glob_match(pattern, entry.path().filename().string())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw DataError(root + ": no files match pattern " + pattern);
  }

  std::map<std::string, int> subdir_ids;
  if (label_from_subdir) {
    for (const auto& f : files) {
      subdir_ids.emplace(f.parent_path().filename().string(), 0);
    }
    int next = 0;
    for (auto& [name, id] : subdir_ids) id = next++;
  }

  SampleSet set;
  set.samples.reserve(files.size());
  for (const auto& f : files) {
    Matrix x = load_pgm(f.string());
    if (!set.samples.empty() && (x.rows() != set.rows() || x.cols() != set.cols())) {
      throw DataError(f.string() + ": image size differs from the rest (resize first)");
    }
    set.samples.push_back(std::move(x));
    if (label_from_subdir) {
      set.labels.push_back(subdir_ids.at(f.parent_path().filename().string()));
    }
  }
  set.provenance.push_back("dir:" + root + ":" + pattern);
  return set;
}

SampleSet load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  const fs::path base = fs::path(path).parent_path();
  SampleSet set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected \"path,label\"");
    }
    const std::string rel = line.substr(0, comma);
    int label = 0;
    try {
      label = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad label");
    }
    fs::path img = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
    Matrix x = load_pgm(img.string());
    if (!set.samples.empty() && (x.rows() != set.rows() || x.cols() != set.cols())) {
      throw DataError(img.string() + ": image size differs from the rest");
    }
    set.samples.push_back(std::move(x));
    set.labels.push_back(label);
  }
  if (set.samples.empty()) {
    throw DataError(path + ": empty manifest");
  }
  set.provenance.push_back("manifest:" + path);
  return set;
}

SampleSet resize(const SampleSet& set, Index new_rows, Index new_cols) {
  if (new_rows < 1 || new_cols < 1) {
    throw DimensionError("resize: target dimensions must be >= 1");
  }
  if (new_rows == set.rows() && new_cols == set.cols()) {
    return set;
  }
  SampleSet out;
  out.labels = set.labels;
  out.provenance = set.provenance;
  out.provenance.push_back("resize:" + std::to_string(new_rows) + "x" + std::to_string(new_cols));
  out.samples.reserve(set.size());
  const Index p = set.rows(), q = set.cols();
  for (const Matrix& x : set.samples) {
    Matrix y(new_rows, new_cols);
    for (Index i = 0; i < new_rows; ++i) {
      // Corner-aligned source coordinates; degenerate axes pin to 0.
      const double si = new_rows > 1 ? double(i) * double(p - 1) / double(new_rows - 1) : 0.0;
      const Index i0 = std::min<Index>(static_cast<Index>(si), p - 1);
      const Index i1 = std::min<Index>(i0 + 1, p - 1);
      const double fi = si - double(i0);
      for (Index j = 0; j < new_cols; ++j) {
        const double sj = new_cols > 1 ? double(j) * double(q - 1) / double(new_cols - 1) : 0.0;
        const Index j0 = std::min<Index>(static_cast<Index>(sj), q - 1);
        const Index j1 = std::min<Index>(j0 + 1, q - 1);
        const double fj = sj - double(j0);
        y(i, j) = (1 - fi) * ((1 - fj) * x(i0, j0) + fj * x(i0, j1)) +
                  fi * ((1 - fj) * x(i1, j0) + fj * x(i1, j1));
      }
    }
    out.samples.push_back(std::move(y));
  }
  return out;
}

std::pair<SampleSet, SampleSet> split(const SampleSet& set, const SplitSpec& spec) {
  if (!set.has_labels()) {
    throw DataError("split: labeled samples required");
  }
  if (spec.train_per_class < 1) {
    throw DataError("split: train_per_class must be >= 1");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t n = 0; n < set.size(); ++n) {
    by_class[set.labels[n]].push_back(n);
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& [label, idx] : by_class) {
    if (static_cast<int>(idx.size()) <= spec.train_per_class) {
      throw DataError("split: class " + std::to_string(label) + " has " +
                      std::to_string(idx.size()) + " samples, need more than " +
                      std::to_string(spec.train_per_class));
    }
    std::vector<std::size_t> order = idx;
    if (spec.mode == SplitSpec::Mode::PerClassCount) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    const auto ntrain = static_cast<std::size_t>(spec.train_per_class);
    std::size_t ntest = order.size() - ntrain;
    if (spec.test_per_class > 0) {
      ntest = std::min<std::size_t>(ntest, static_cast<std::size_t>(spec.test_per_class));
    }
    train_idx.insert(train_idx.end(), order.begin(), order.begin() + ntrain);
    test_idx.insert(test_idx.end(), order.begin() + ntrain, order.begin() + ntrain + ntest);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&set](const std::vector<std::size_t>& idx, const char* tag) {
    SampleSet s;
    s.provenance = set.provenance;
    s.provenance.push_back(tag);
    s.samples.reserve(idx.size());
    s.labels.reserve(idx.size());
    for (std::size_t n : idx) {
      s.samples.push_back(set.samples[n]);
      s.labels.push_back(set.labels[n]);
    }
    return s;
  };
  return {take(train_idx, "split:train"), take(test_idx, "split:test")};
}

}  // namespace mixb2d
