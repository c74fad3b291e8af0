#include "steuler/fields.hpp"

#include <stdexcept>

namespace steuler {

ScalarField::ScalarField(const GridSpec& grid)
    : grid_(grid), values_(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(grid.size()))) {}

ScalarField::ScalarField(const GridSpec& grid, Eigen::ArrayXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(grid_.size()))
    throw std::invalid_argument("ScalarField: value count does not match grid");
}

ScalarField ScalarField::constant(const GridSpec& grid, double c) {
  return ScalarField(grid, Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(grid.size()), c));
}

ScalarField ScalarField::from_function(const GridSpec& grid,
                                       const std::function<double(const Eigen::Vector3d&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.values_[static_cast<Eigen::Index>(i)] = f(grid.position(i));
  return out;
}

VectorField::VectorField(const GridSpec& grid)
    : grid_(grid), data_(Eigen::ArrayXXd::Zero(static_cast<Eigen::Index>(grid.size()), grid.dim)) {}

VectorField::VectorField(const GridSpec& grid, Eigen::ArrayXXd data)
    : grid_(grid), data_(std::move(data)) {
  if (data_.rows() != static_cast<Eigen::Index>(grid_.size()) || data_.cols() != grid_.dim)
    throw std::invalid_argument("VectorField: data shape does not match grid");
}

VectorField::VectorField(const std::vector<ScalarField>& components) {
  if (components.empty()) throw std::invalid_argument("VectorField: no components");
  grid_ = components.front().grid();
  if (static_cast<int>(components.size()) != grid_.dim)
    throw std::invalid_argument("VectorField: component count must equal grid dimension");
  data_.resize(static_cast<Eigen::Index>(grid_.size()), grid_.dim);
  for (int a = 0; a < grid_.dim; ++a) {
    if (!(components[a].grid() == grid_))
      throw std::invalid_argument("VectorField: components must share one grid");
    data_.col(a) = components[a].values();
  }
}

VectorField VectorField::from_function(
    const GridSpec& grid, const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& f) {
  VectorField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::Vector3d v = f(grid.position(i));
    for (int a = 0; a < grid.dim; ++a) out.data_(static_cast<Eigen::Index>(i), a) = v[a];
  }
  return out;
}

ScalarField VectorField::component(int a) const { return ScalarField(grid_, data_.col(a)); }

void VectorField::set_component(int a, const ScalarField& f) {
  if (!(f.grid() == grid_)) throw std::invalid_argument("VectorField: grid mismatch");
  data_.col(a) = f.values();
}

namespace {
void require_same(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw std::invalid_argument("field arithmetic on mismatched grids");
}
}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same(a.grid(), b.grid());
  return ScalarField(a.grid(), a.values() + b.values());
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same(a.grid(), b.grid());
  return ScalarField(a.grid(), a.values() - b.values());
}
ScalarField operator*(double s, const ScalarField& a) { return ScalarField(a.grid(), s * a.values()); }

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same(a.grid(), b.grid());
  return VectorField(a.grid(), a.data() + b.data());
}
VectorField operator-(const VectorField& a, const VectorField& b) {
  require_same(a.grid(), b.grid());
  return VectorField(a.grid(), a.data() - b.data());
}
VectorField operator*(double s, const VectorField& a) { return VectorField(a.grid(), s * a.data()); }

template <typename Field>
void validate(const TimeSeries<Field>& series) {
  if (series.nodes() != series.time.nodes())
    throw std::invalid_argument("time series: frame count must equal n_steps + 1");
  for (const auto& f : series.frames)
    if (!(f.grid() == series.frames.front().grid()))
      throw std::invalid_argument("time series: frames must share one grid");
}

template void validate(const TimeSeries<ScalarField>&);
template void validate(const TimeSeries<VectorField>&);

}  // namespace steuler
