#include "steuler/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "steuler/spectral.hpp"

namespace steuler {

namespace {

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("Sobolev/L^p exponent must satisfy 1 < p < inf");
}

}  // namespace

double lp_norm(const Eigen::ArrayXd& values, const GridSpec& grid, double p) {
  check_p(p);
  const double scale = values.abs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) acc += std::pow(std::abs(values[i]) / scale, p);
  return scale * std::pow(acc * grid.cell_volume(), 1.0 / p);
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double l2_norm(const VectorField& v) { return std::sqrt(inner(v, v)); }

double inner(const ScalarField& a, const ScalarField& b) {
  return (a.values() * b.values()).sum() * a.grid().cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
  return (a.data() * b.data()).sum() * a.grid().cell_volume();
}

double sobolev_norm(const ScalarField& f, int k, double p) {
  check_p(p);
  if (k < 0 || k > 2) throw std::invalid_argument("Sobolev order must be 0, 1 or 2");
  const auto& sp = Spectral::for_grid(f.grid());
  double total = lp_norm(f.values(), f.grid(), p);
  if (k == 0) return total;
  const Eigen::ArrayXcd fh = sp.forward(f.values());
  for (int order = 1; order <= k; ++order)
    for (const auto& m : multi_indices(f.grid().dim, order))
      total += lp_norm(sp.inverse(fh * sp.derivative_symbol(m)), f.grid(), p);
  return total;
}

double sobolev_norm(const VectorField& v, int k, double p) {
  double total = 0.0;
  for (int a = 0; a < v.dim(); ++a) total += sobolev_norm(v.component(a), k, p);
  return total;
}

double sup_norm(const ScalarField& f) { return f.values().size() ? f.values().abs().maxCoeff() : 0.0; }

double sup_norm(const VectorField& v) { return v.data().size() ? v.data().abs().maxCoeff() : 0.0; }

}  // namespace steuler
