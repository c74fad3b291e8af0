#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "steuler/grid.hpp"

namespace steuler {

/// Real samples of a scalar function on a periodic grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& grid);
  ScalarField(const GridSpec& grid, Eigen::ArrayXd values);

  static ScalarField constant(const GridSpec& grid, double c);
  static ScalarField from_function(const GridSpec& grid,
                                   const std::function<double(const Eigen::Vector3d&)>& f);

  const GridSpec& grid() const { return grid_; }
  const Eigen::ArrayXd& values() const { return values_; }
  Eigen::ArrayXd& values() { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  bool all_finite() const { return values_.allFinite(); }

 private:
  GridSpec grid_;
  Eigen::ArrayXd values_;
};

/// dim component fields sharing one grid; column a of data() is component a.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const GridSpec& grid);
  VectorField(const GridSpec& grid, Eigen::ArrayXXd data);
  explicit VectorField(const std::vector<ScalarField>& components);

  static VectorField from_function(
      const GridSpec& grid, const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& f);

  const GridSpec& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  const Eigen::ArrayXXd& data() const { return data_; }
  Eigen::ArrayXXd& data() { return data_; }

  auto col(int a) { return data_.col(a); }
  auto col(int a) const { return data_.col(a); }
  ScalarField component(int a) const;
  void set_component(int a, const ScalarField& f);

  bool all_finite() const { return data_.allFinite(); }

 private:
  GridSpec grid_;
  Eigen::ArrayXXd data_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);

/// A field-valued function sampled on a uniform time grid, one frame per node.
template <typename Field>
struct TimeSeries {
  TimeGrid time;
  std::vector<Field> frames;

  TimeSeries() = default;
  TimeSeries(const TimeGrid& t, std::vector<Field> f) : time(t), frames(std::move(f)) {}
  TimeSeries(const TimeGrid& t, const Field& fill) : time(t), frames(t.nodes(), fill) {}

  const GridSpec& grid() const { return frames.front().grid(); }
  int nodes() const { return static_cast<int>(frames.size()); }
  const Field& operator[](int n) const { return frames[n]; }
  Field& operator[](int n) { return frames[n]; }
};

using ScalarSeries = TimeSeries<ScalarField>;
using VectorSeries = TimeSeries<VectorField>;

/// Throws std::invalid_argument when the frame count does not match the
/// time grid or frames disagree on their grid.
template <typename Field>
void validate(const TimeSeries<Field>& series);

}  // namespace steuler
