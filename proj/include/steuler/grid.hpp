#pragma once

#include <array>
#include <cstddef>
#include <numbers>

#include <Eigen/Core>

namespace steuler {

/// Periodic tensor-product grid on the torus [0, length)^dim.
///
/// Points are stored row-major over axes with axis 0 varying slowest, so the
/// flat index of (i0, i1, i2) is (i0 * n + i1) * n + i2.
struct GridSpec {
  int dim = 2;
  int n = 64;
  double length = 2.0 * std::numbers::pi;

  GridSpec() = default;
  GridSpec(int dim, int n, double length = 2.0 * std::numbers::pi);

  std::size_t size() const;
  double spacing() const { return length / n; }
  double volume() const;
  double cell_volume() const;

  /// Per-axis integer coordinates of a flat index (unused axes are 0).
  std::array<int, 3> unravel(std::size_t idx) const;
  std::size_t ravel(const std::array<int, 3>& ijk) const;
  /// Physical coordinates of a grid point (unused axes are 0).
  Eigen::Vector3d position(std::size_t idx) const;

  bool operator==(const GridSpec&) const = default;
};

/// Throws std::invalid_argument unless dim is 2 or 3, n >= 8 is a power of
/// two and length is positive.
void validate(const GridSpec& grid);

/// Uniform time grid 0 = t_0 < ... < t_{n_steps} = t_end.
struct TimeGrid {
  double t_end = 1.0;
  int n_steps = 1;

  int nodes() const { return n_steps + 1; }
  double dt() const { return t_end / n_steps; }
  double t(int i) const { return i == n_steps ? t_end : i * dt(); }

  bool operator==(const TimeGrid&) const = default;
};

}  // namespace steuler
