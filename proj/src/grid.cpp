#include "steuler/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace steuler {

GridSpec::GridSpec(int dim_, int n_, double length_) : dim(dim_), n(n_), length(length_) {
  validate(*this);
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

double GridSpec::volume() const { return std::pow(length, dim); }

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

std::array<int, 3> GridSpec::unravel(std::size_t idx) const {
  std::array<int, 3> ijk{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    ijk[a] = static_cast<int>(idx % n);
    idx /= n;
  }
  return ijk;
}

std::size_t GridSpec::ravel(const std::array<int, 3>& ijk) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim; ++a) {
    int i = ijk[a] % n;
    if (i < 0) i += n;
    idx = idx * n + static_cast<std::size_t>(i);
  }
  return idx;
}

Eigen::Vector3d GridSpec::position(std::size_t idx) const {
  const auto ijk = unravel(idx);
  const double h = spacing();
  return {ijk[0] * h, ijk[1] * h, ijk[2] * h};
}

void validate(const GridSpec& grid) {
  if (grid.dim != 2 && grid.dim != 3)
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(grid.dim));
  if (grid.n < 8 || (grid.n & (grid.n - 1)) != 0)
    throw std::invalid_argument("n_per_axis must be a power of two >= 8, got " +
                                std::to_string(grid.n));
  if (!(grid.length > 0.0) || !std::isfinite(grid.length))
    throw std::invalid_argument("domain length must be positive and finite");
}

}  // namespace steuler
