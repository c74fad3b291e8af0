#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "steuler/fields.hpp"
#include "steuler/spectral.hpp"

namespace steuler {

/// Evaluates a gridded field near a grid node: value at position(node) + offset,
/// with offset in physical units. Implementations reproduce nodal data
/// bit-for-bit when the offset is exactly zero.
class LocalEvaluator {
 public:
  virtual ~LocalEvaluator() = default;
  virtual double at(std::size_t node, const double* offset) const = 0;
};

/// Periodic cubic B-spline interpolant. Coefficients come from an exact
/// spectral prefilter, so the interpolant reproduces the samples.
class PeriodicSpline final : public LocalEvaluator {
 public:
  explicit PeriodicSpline(const ScalarField& f);

  /// Value at an arbitrary physical position (wrapped periodically).
  double operator()(const double* x) const;
  double at(std::size_t node, const double* offset) const override;

 private:
  double eval_grid_units(const double* u) const;

  GridSpec grid_;
  Eigen::ArrayXd coeffs_;
  Eigen::ArrayXd values_;
};

/// Order-q Taylor expansion about each node with spectrally exact derivative
/// jets. Accurate for offsets small compared with the shortest resolved
/// wavelength; used for semi-Lagrangian feet that stay within a fraction of a
/// cell of their arrival node.
class TaylorJet final : public LocalEvaluator {
 public:
  TaylorJet(const ScalarField& f, int order);

  double at(std::size_t node, const double* offset) const override;
  int order() const { return order_; }

 private:
  GridSpec grid_;
  int order_;
  std::vector<MultiIndex> terms_;
  Eigen::ArrayXXd jets_;  // (terms, points); row 0 holds the nodal values
};

enum class FootInterpolation { taylor, cubic_spline };

std::unique_ptr<LocalEvaluator> make_evaluator(const ScalarField& f, FootInterpolation kind,
                                               int taylor_order);

/// Periodic cubic-spline interpolation of f at each column of points
/// (dim x count, physical coordinates).
Eigen::VectorXd interpolate(const ScalarField& f, const Eigen::MatrixXd& points);

}  // namespace steuler
