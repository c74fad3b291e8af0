#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "steuler/fields.hpp"

namespace steuler {

/// On-disk field: little-endian float64 values, component blocks each
/// row-major over axes, plus a JSON sidecar
/// {dim, n_per_axis, length, components, time_index, ...}.
struct StoredField {
  GridSpec grid;
  int components = 1;
  int time_index = 0;
  nlohmann::json header;
  Eigen::ArrayXXd data;  // (points, components)

  ScalarField scalar() const;
  VectorField vector() const;
};

/// Writes <stem>.bin and <stem>.json. Extra header keys are merged in.
void write_field(const std::filesystem::path& stem, const ScalarField& f, int time_index,
                 const nlohmann::json& extra = {});
void write_field(const std::filesystem::path& stem, const VectorField& v, int time_index,
                 const nlohmann::json& extra = {});
StoredField read_field(const std::filesystem::path& stem);

void write_float64(const std::filesystem::path& file, const double* data, std::size_t count);
Eigen::ArrayXd read_float64(const std::filesystem::path& file);

nlohmann::json read_json(const std::filesystem::path& file);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);

}  // namespace steuler
