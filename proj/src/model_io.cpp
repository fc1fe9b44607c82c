#include "mixb2d/model_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace mixb2d {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError(path + ": truncated container");
  }
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 8);
}

double get_f64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw DataError(path + ": truncated container");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

const Matrix& Container::find(const std::string& name) const {
  for (const auto& rec : records) {
    if (rec.name == name) return rec.value;
  }
  throw DataError("container: missing record \"" + name + "\"");
}

bool Container::has(const std::string& name) const {
  for (const auto& rec : records) {
    if (rec.name == name) return true;
  }
  return false;
}

void write_container(const std::string& path, const Container& container) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError(path + ": cannot open for writing");
  }
  out << container.header << '\n';
  for (std::uint32_t d : container.dims) put_u32(out, d);
  put_u32(out, static_cast<std::uint32_t>(container.records.size()));
  for (const auto& rec : container.records) {
    put_u32(out, static_cast<std::uint32_t>(rec.name.size()));
    out.write(rec.name.data(), static_cast<std::streamsize>(rec.name.size()));
    put_u32(out, static_cast<std::uint32_t>(rec.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(rec.value.cols()));
    for (Index i = 0; i < rec.value.rows(); ++i) {
      for (Index j = 0; j < rec.value.cols(); ++j) {
        put_f64(out, rec.value(i, j));
      }
    }
  }
  if (!out) {
    throw DataError(path + ": write failed");
  }
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  Container container;
  if (!std::getline(in, container.header)) {
    throw DataError(path + ": missing container header");
  }
  for (auto& d : container.dims) d = get_u32(in, path);
  const std::uint32_t count = get_u32(in, path);
  container.records.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    ContainerRecord rec;
    const std::uint32_t name_len = get_u32(in, path);
    rec.name.resize(name_len);
    if (!in.read(rec.name.data(), name_len)) {
      throw DataError(path + ": truncated record name");
    }
    const std::uint32_t rows = get_u32(in, path);
    const std::uint32_t cols = get_u32(in, path);
    rec.value.resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) {
        rec.value(i, j) = get_f64(in, path);
      }
    }
    container.records.push_back(std::move(rec));
  }
  return container;
}

void save_model(const MixtureParams& params, const std::string& path) {
  Container c;
  c.header = kMixtureHeader;
  c.dims = {static_cast<std::uint32_t>(params.p), static_cast<std::uint32_t>(params.q),
            static_cast<std::uint32_t>(params.r), static_cast<std::uint32_t>(params.c),
            static_cast<std::uint32_t>(params.K)};
  for (int k = 0; k < params.K; ++k) {
    const std::string suffix = "." + std::to_string(k);
    c.records.push_back({"pi" + suffix, scalar(params.weight[k])});
    c.records.push_back({"M" + suffix, params.mean[k]});
    c.records.push_back({"L" + suffix, params.left[k]});
    c.records.push_back({"R" + suffix, params.right[k]});
    c.records.push_back({"sigma2" + suffix, scalar(params.noise[k])});
  }
  write_container(path, c);
}

MixtureParams load_mixture_model(const std::string& path) {
  const Container c = read_container(path);
  if (c.header != kMixtureHeader) {
    throw DataError(path + ": expected header " + std::string(kMixtureHeader) + ", found \"" +
                    c.header + "\"");
  }
  MixtureParams params;
  params.p = c.dims[0];
  params.q = c.dims[1];
  params.r = c.dims[2];
  params.c = c.dims[3];
  params.K = static_cast<int>(c.dims[4]);
  for (int k = 0; k < params.K; ++k) {
    const std::string suffix = "." + std::to_string(k);
    params.weight.push_back(c.find("pi" + suffix)(0, 0));
    params.mean.push_back(c.find("M" + suffix));
    params.left.push_back(c.find("L" + suffix));
    params.right.push_back(c.find("R" + suffix));
    params.noise.push_back(c.find("sigma2" + suffix)(0, 0));
  }
  params.validate();
  return params;
}

void save_model(const GlramModel& model, const std::string& path) {
  Container c;
  c.header = kGlramHeader;
  c.dims = {static_cast<std::uint32_t>(model.left.rows()),
            static_cast<std::uint32_t>(model.right.rows()),
            static_cast<std::uint32_t>(model.left.cols()),
            static_cast<std::uint32_t>(model.right.cols()), 1u};
  c.records.push_back({"mean", model.mean});
  c.records.push_back({"left", model.left});
  c.records.push_back({"right", model.right});
  c.records.push_back({"centered", scalar(model.centered ? 1.0 : 0.0)});
  for (std::size_t n = 0; n < model.cores.size(); ++n) {
    c.records.push_back({"core." + std::to_string(n), model.cores[n]});
  }
  write_container(path, c);
}

GlramModel load_glram_model(const std::string& path) {
  const Container c = read_container(path);
  if (c.header != kGlramHeader) {
    throw DataError(path + ": expected header " + std::string(kGlramHeader) + ", found \"" +
                    c.header + "\"");
  }
  GlramModel model;
  model.mean = c.find("mean");
  model.left = c.find("left");
  model.right = c.find("right");
  model.centered = c.find("centered")(0, 0) != 0.0;
  for (std::size_t n = 0; c.has("core." + std::to_string(n)); ++n) {
    model.cores.push_back(c.find("core." + std::to_string(n)));
  }
  return model;
}

void save_model(const MixPpcaModel& model, const std::string& path) {
  Container c;
  c.header = kMixPpcaHeader;
  c.dims = {static_cast<std::uint32_t>(model.p), static_cast<std::uint32_t>(model.q),
            static_cast<std::uint32_t>(model.d), 1u, static_cast<std::uint32_t>(model.K)};
  for (int k = 0; k < model.K; ++k) {
    const std::string suffix = "." + std::to_string(k);
    c.records.push_back({"pi" + suffix, scalar(model.weight[k])});
    c.records.push_back({"mu" + suffix, model.mean[k]});
    c.records.push_back({"W" + suffix, model.loading[k]});
    c.records.push_back({"sigma2" + suffix, scalar(model.noise[k])});
  }
  write_container(path, c);
}

MixPpcaModel load_mixppca_model(const std::string& path) {
  const Container c = read_container(path);
  if (c.header != kMixPpcaHeader) {
    throw DataError(path + ": expected header " + std::string(kMixPpcaHeader) + ", found \"" +
                    c.header + "\"");
  }
  MixPpcaModel model;
  model.p = c.dims[0];
  model.q = c.dims[1];
  model.d = c.dims[2];
  model.K = static_cast<int>(c.dims[4]);
  model.dim = model.p * model.q;
  for (int k = 0; k < model.K; ++k) {
    const std::string suffix = "." + std::to_string(k);
    model.weight.push_back(c.find("pi" + suffix)(0, 0));
    model.mean.push_back(c.find("mu" + suffix));
    model.loading.push_back(c.find("W" + suffix));
    model.noise.push_back(c.find("sigma2" + suffix)(0, 0));
  }
  return model;
}

std::string model_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw DataError(path + ": missing container header");
  }
  return header;
}

std::string describe_container(const std::string& path) {
  const Container c = read_container(path);
  std::ostringstream out;
  out << "header: " << c.header << "\n";
  out << "dims: " << c.dims[0] << " " << c.dims[1] << " " << c.dims[2] << " " << c.dims[3] << " "
      << c.dims[4] << "\n";
  out << "records: " << c.records.size() << "\n";
  for (const auto& rec : c.records) {
    out << "  " << rec.name << " [" << rec.value.rows() << "x" << rec.value.cols() << "]\n";
  }
  return out.str();
}

}  // namespace mixb2d
