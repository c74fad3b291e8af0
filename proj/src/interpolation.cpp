#include "steuler/interpolation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace steuler {

namespace {

inline void bspline_weights(double t, double* w) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double s = 1.0 - t;
  w[0] = s * s * s / 6.0;
  w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
  w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
  w[3] = t3 / 6.0;
}

inline int wrap(long i, int n) {
  long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

PeriodicSpline::PeriodicSpline(const ScalarField& f) : grid_(f.grid()), values_(f.values()) {
  const auto& sp = Spectral::for_grid(grid_);
  Eigen::ArrayXd symbol = Eigen::ArrayXd::Ones(sp.spectral_size());
  for (int a = 0; a < grid_.dim; ++a)
    symbol *= (4.0 + 2.0 * (2.0 * std::numbers::pi / grid_.n * sp.mode(a)).cos()) / 6.0;
  coeffs_ = sp.inverse(sp.forward(values_) / symbol.cast<std::complex<double>>());
}

double PeriodicSpline::eval_grid_units(const double* u) const {
  const int n = grid_.n;
  const int d = grid_.dim;
  std::array<long, 3> base{0, 0, 0};
  std::array<double, 3> frac{0, 0, 0};
  bool on_node = true;
  for (int a = 0; a < d; ++a) {
    const double fl = std::floor(u[a]);
    base[a] = static_cast<long>(fl);
    frac[a] = u[a] - fl;
    on_node = on_node && frac[a] == 0.0;
  }
  if (on_node) {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < d; ++a) ijk[a] = wrap(base[a], n);
    return values_[static_cast<Eigen::Index>(grid_.ravel(ijk))];
  }
  double w[3][4];
  for (int a = 0; a < d; ++a) bspline_weights(frac[a], w[a]);
  int idx[3][4];
  for (int a = 0; a < d; ++a)
    for (int r = 0; r < 4; ++r) idx[a][r] = wrap(base[a] - 1 + r, n);

  double acc = 0.0;
  if (d == 2) {
    for (int r0 = 0; r0 < 4; ++r0) {
      const std::size_t row = static_cast<std::size_t>(idx[0][r0]) * n;
      double inner = 0.0;
      for (int r1 = 0; r1 < 4; ++r1) inner += w[1][r1] * coeffs_[static_cast<Eigen::Index>(row + idx[1][r1])];
      acc += w[0][r0] * inner;
    }
  } else {
    for (int r0 = 0; r0 < 4; ++r0) {
      double mid = 0.0;
      for (int r1 = 0; r1 < 4; ++r1) {
        const std::size_t row = (static_cast<std::size_t>(idx[0][r0]) * n + idx[1][r1]) * n;
        double inner = 0.0;
        for (int r2 = 0; r2 < 4; ++r2) inner += w[2][r2] * coeffs_[static_cast<Eigen::Index>(row + idx[2][r2])];
        mid += w[1][r1] * inner;
      }
      acc += w[0][r0] * mid;
    }
  }
  return acc;
}

double PeriodicSpline::operator()(const double* x) const {
  const double h = grid_.spacing();
  double u[3] = {0, 0, 0};
  for (int a = 0; a < grid_.dim; ++a) u[a] = x[a] / h;
  return eval_grid_units(u);
}

double PeriodicSpline::at(std::size_t node, const double* offset) const {
  const auto ijk = grid_.unravel(node);
  const double h = grid_.spacing();
  double u[3] = {0, 0, 0};
  for (int a = 0; a < grid_.dim; ++a) u[a] = ijk[a] + offset[a] / h;
  return eval_grid_units(u);
}

TaylorJet::TaylorJet(const ScalarField& f, int order) : grid_(f.grid()), order_(order) {
  if (order < 1 || order > 8) throw std::invalid_argument("Taylor order must be in [1, 8]");
  for (int q = 0; q <= order; ++q)
    for (const auto& m : multi_indices(grid_.dim, q)) terms_.push_back(m);
  const auto& sp = Spectral::for_grid(grid_);
  const Eigen::ArrayXcd fh = sp.forward(f.values());
  jets_.resize(static_cast<Eigen::Index>(terms_.size()), f.values().size());
  jets_.row(0) = f.values().transpose();
  for (std::size_t t = 1; t < terms_.size(); ++t) {
    const auto& m = terms_[t];
    double factorial = 1.0;
    for (int a = 0; a < 3; ++a)
      for (int r = 2; r <= m[a]; ++r) factorial *= r;
    jets_.row(static_cast<Eigen::Index>(t)) =
        (sp.inverse(fh * sp.derivative_symbol(m)) / factorial).transpose();
  }
}

double TaylorJet::at(std::size_t node, const double* offset) const {
  const auto col = jets_.col(static_cast<Eigen::Index>(node));
  bool zero = true;
  for (int a = 0; a < grid_.dim; ++a) zero = zero && offset[a] == 0.0;
  if (zero) return col[0];
  double pw[3][9];
  for (int a = 0; a < 3; ++a) {
    pw[a][0] = 1.0;
    const double o = a < grid_.dim ? offset[a] : 0.0;
    for (int e = 1; e <= order_; ++e) pw[a][e] = pw[a][e - 1] * o;
  }
  double acc = col[0];
  for (std::size_t t = 1; t < terms_.size(); ++t) {
    const auto& m = terms_[t];
    acc += col[static_cast<Eigen::Index>(t)] * (pw[0][m[0]] * pw[1][m[1]] * pw[2][m[2]]);
  }
  return acc;
}

std::unique_ptr<LocalEvaluator> make_evaluator(const ScalarField& f, FootInterpolation kind,
                                               int taylor_order) {
  if (kind == FootInterpolation::taylor) return std::make_unique<TaylorJet>(f, taylor_order);
  return std::make_unique<PeriodicSpline>(f);
}

Eigen::VectorXd interpolate(const ScalarField& f, const Eigen::MatrixXd& points) {
  if (points.rows() != f.grid().dim) throw std::invalid_argument("interpolate: points must be dim x count");
  const PeriodicSpline spline(f);
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    double p[3] = {0, 0, 0};
    for (int a = 0; a < f.grid().dim; ++a) p[a] = points(a, c);
    out[c] = spline(p);
  }
  return out;
}

}  // namespace steuler
