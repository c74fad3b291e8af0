#include "steuler/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace steuler {

namespace fs = std::filesystem;

namespace {

fs::path with_ext(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

std::uint64_t byteswap64(std::uint64_t x) {
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r = (r << 8) | ((x >> (8 * i)) & 0xffu);
  return r;
}

void write_block(const fs::path& stem, const GridSpec& grid, int components, int time_index,
                 const double* data, const nlohmann::json& extra) {
  write_float64(with_ext(stem, ".bin"), data, grid.size() * static_cast<std::size_t>(components));
  nlohmann::json h = extra.is_object() ? extra : nlohmann::json::object();
  h["dim"] = grid.dim;
  h["n_per_axis"] = grid.n;
  h["length"] = grid.length;
  h["components"] = components;
  h["time_index"] = time_index;
  if (!h.contains("kind")) h["kind"] = "field";
  write_json(with_ext(stem, ".json"), h);
}

}  // namespace

ScalarField StoredField::scalar() const {
  if (components != 1) throw std::invalid_argument("stored field is not scalar");
  return ScalarField(grid, data.col(0));
}

VectorField StoredField::vector() const { return VectorField(grid, data); }

void write_field(const fs::path& stem, const ScalarField& f, int time_index, const nlohmann::json& extra) {
  write_block(stem, f.grid(), 1, time_index, f.values().data(), extra);
}

void write_field(const fs::path& stem, const VectorField& v, int time_index, const nlohmann::json& extra) {
  write_block(stem, v.grid(), v.dim(), time_index, v.data().data(), extra);
}

StoredField read_field(const fs::path& stem) {
  StoredField out;
  out.header = read_json(with_ext(stem, ".json"));
  out.grid = GridSpec(out.header.at("dim").get<int>(), out.header.at("n_per_axis").get<int>(),
                      out.header.at("length").get<double>());
  out.components = out.header.at("components").get<int>();
  out.time_index = out.header.at("time_index").get<int>();
  const Eigen::ArrayXd flat = read_float64(with_ext(stem, ".bin"));
  const auto rows = static_cast<Eigen::Index>(out.grid.size());
  if (flat.size() != rows * out.components)
    throw std::runtime_error("field file " + stem.string() + ": size does not match header");
  out.data = Eigen::Map<const Eigen::ArrayXXd>(flat.data(), rows, out.components);
  return out;
}

void write_float64(const fs::path& file, const double* data, std::size_t count) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, data + i, 8);
      bits = byteswap64(bits);
      os.write(reinterpret_cast<const char*>(&bits), 8);
    }
  }
  if (!os) throw std::runtime_error("write failed: " + file.string());
}

Eigen::ArrayXd read_float64(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  const auto bytes = fs::file_size(file);
  if (bytes % 8 != 0) throw std::runtime_error(file.string() + ": size is not a multiple of 8");
  Eigen::ArrayXd out(static_cast<Eigen::Index>(bytes / 8));
  is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  if constexpr (std::endian::native != std::endian::little) {
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &out[i], 8);
      bits = byteswap64(bits);
      std::memcpy(&out[i], &bits, 8);
    }
  }
  return out;
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  return nlohmann::json::parse(is);
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os << j.dump(2) << '\n';
}

}  // namespace steuler
