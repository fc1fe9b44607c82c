#ifndef MIXB2D_MODEL_IO_HPP
#define MIXB2D_MODEL_IO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mixb2d/baselines.hpp"
#include "mixb2d/model.hpp"

namespace mixb2d {

/// Self-describing model container. Layout, all integers little-endian:
///   header line (e.g. "MIXB2DPPCA/1") terminated by '\n'
///   5 x u32 dims (p, q, r, c, K)
///   u32 record count
///   per record: u32 name length, name bytes,
///               u32 rows, u32 cols, rows*cols f64 values in row-major order
struct ContainerRecord {
  std::string name;
  Matrix value;
};

struct Container {
  std::string header;
  std::array<std::uint32_t, 5> dims{};
  std::vector<ContainerRecord> records;

  const Matrix& find(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_container(const std::string& path, const Container& container);
Container read_container(const std::string& path);

inline constexpr const char* kMixtureHeader = "MIXB2DPPCA/1";
inline constexpr const char* kGlramHeader = "GLRAM/1";
inline constexpr const char* kMixPpcaHeader = "MIXPPCA/1";

void save_model(const MixtureParams& params, const std::string& path);
void save_model(const GlramModel& model, const std::string& path);
void save_model(const MixPpcaModel& model, const std::string& path);

MixtureParams load_mixture_model(const std::string& path);
GlramModel load_glram_model(const std::string& path);
MixPpcaModel load_mixppca_model(const std::string& path);

/// Header line of a container file (model kind dispatch).
std::string model_header(const std::string& path);

/// Human-readable header/dims/record listing.
std::string describe_container(const std::string& path);

}  // namespace mixb2d

#endif  // MIXB2D_MODEL_IO_HPP
