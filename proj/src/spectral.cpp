#include "steuler/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include <fftw3.h>

namespace steuler {

namespace {

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

std::vector<MultiIndex> multi_indices(int dim, int order) {
  std::vector<MultiIndex> out;
  if (dim == 2) {
    for (int a = order; a >= 0; --a) out.push_back({a, order - a, 0});
  } else {
    for (int a = order; a >= 0; --a)
      for (int b = order - a; b >= 0; --b) out.push_back({a, b, order - a - b});
  }
  return out;
}

const Spectral& Spectral::for_grid(const GridSpec& grid) {
  using Key = std::tuple<int, int, double>;
  static std::map<Key, std::unique_ptr<Spectral>> cache;
  std::lock_guard lock(cache_mutex());
  auto& slot = cache[{grid.dim, grid.n, grid.length}];
  if (!slot) slot = std::make_unique<Spectral>(grid);
  return *slot;
}

Spectral::Spectral(const GridSpec& grid) : grid_(grid) {
  validate(grid_);
  const int n = grid_.n;
  const int half = n / 2 + 1;
  spectral_size_ = half;
  for (int a = 0; a < grid_.dim - 1; ++a) spectral_size_ *= n;

  const double k0 = 2.0 * std::numbers::pi / grid_.length;
  const int cutoff = n / 3;
  for (int a = 0; a < 3; ++a) {
    mode_[a] = Eigen::ArrayXd::Zero(spectral_size_);
    k_eff_[a] = Eigen::ArrayXd::Zero(spectral_size_);
  }
  k2_ = Eigen::ArrayXd::Zero(spectral_size_);
  dealias_ = Eigen::ArrayXd::Ones(spectral_size_);

  for (Eigen::Index s = 0; s < spectral_size_; ++s) {
    Eigen::Index rest = s;
    std::array<int, 3> j{0, 0, 0};
    j[grid_.dim - 1] = static_cast<int>(rest % half);
    rest /= half;
    for (int a = grid_.dim - 2; a >= 0; --a) {
      j[a] = static_cast<int>(rest % n);
      rest /= n;
    }
    for (int a = 0; a < grid_.dim; ++a) {
      const int m = (a == grid_.dim - 1 || j[a] <= n / 2) ? j[a] : j[a] - n;
      mode_[a][s] = m;
      const bool nyquist = std::abs(m) == n / 2;
      k_eff_[a][s] = nyquist ? 0.0 : k0 * m;
      k2_[s] += k_eff_[a][s] * k_eff_[a][s];
      if (std::abs(m) > cutoff) dealias_[s] = 0.0;
    }
  }

  std::array<int, 3> dims{n, n, n};
  const auto real_size = static_cast<std::size_t>(grid_.size());
  double* in = fftw_alloc_real(real_size);
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(spectral_size_));
  std::lock_guard planner_lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c(grid_.dim, dims.data(), in, out, kPlanFlags);
  inverse_plan_ = fftw_plan_dft_c2r(grid_.dim, dims.data(), out, in, kPlanFlags);
  fftw_free(in);
  fftw_free(out);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("FFTW plan creation failed");
}

Spectral::~Spectral() {
  std::lock_guard planner_lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

Eigen::ArrayXcd Spectral::forward(const Eigen::ArrayXd& values) const {
  Eigen::ArrayXd in = values;  // r2c may scribble on its input
  Eigen::ArrayXcd out(spectral_size_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::ArrayXd Spectral::inverse(const Eigen::ArrayXcd& spectrum) const {
  Eigen::ArrayXcd in = spectrum;  // c2r destroys its input
  Eigen::ArrayXd out(static_cast<Eigen::Index>(grid_.size()));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
  out /= static_cast<double>(grid_.size());
  return out;
}

Eigen::ArrayXcd Spectral::derivative_symbol(const MultiIndex& m) const {
  const int order = m[0] + m[1] + m[2];
  static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  Eigen::ArrayXd magnitude = Eigen::ArrayXd::Ones(spectral_size_);
  for (int a = 0; a < grid_.dim; ++a)
    for (int r = 0; r < m[a]; ++r) magnitude *= k_eff_[a];
  return magnitude.cast<std::complex<double>>() * ipow[order % 4];
}

ScalarField derivative(const ScalarField& f, const MultiIndex& m) {
  const auto& sp = Spectral::for_grid(f.grid());
  return ScalarField(f.grid(), sp.inverse(sp.forward(f.values()) * sp.derivative_symbol(m)));
}

VectorField gradient(const ScalarField& f) {
  const auto& sp = Spectral::for_grid(f.grid());
  const Eigen::ArrayXcd fh = sp.forward(f.values());
  VectorField out(f.grid());
  const std::complex<double> I(0.0, 1.0);
  for (int a = 0; a < f.grid().dim; ++a)
    out.col(a) = sp.inverse(fh * (I * sp.derivative_wavenumber(a).cast<std::complex<double>>()));
  return out;
}

ScalarField divergence(const VectorField& v) {
  const auto& sp = Spectral::for_grid(v.grid());
  Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(sp.spectral_size());
  const std::complex<double> I(0.0, 1.0);
  for (int a = 0; a < v.dim(); ++a)
    acc += sp.forward(v.col(a)) * (I * sp.derivative_wavenumber(a).cast<std::complex<double>>());
  return ScalarField(v.grid(), sp.inverse(acc));
}

ScalarField laplacian(const ScalarField& f) {
  const auto& sp = Spectral::for_grid(f.grid());
  return ScalarField(f.grid(), sp.inverse(sp.forward(f.values()) * (-sp.k_squared())));
}

ScalarField solve_poisson(const ScalarField& rhs) {
  const auto& sp = Spectral::for_grid(rhs.grid());
  Eigen::ArrayXcd h = sp.forward(rhs.values());
  const auto& k2 = sp.k_squared();
  for (Eigen::Index s = 0; s < h.size(); ++s) h[s] = k2[s] > 0.0 ? -h[s] / k2[s] : 0.0;
  return ScalarField(rhs.grid(), sp.inverse(h));
}

ScalarField dealias(const ScalarField& f) {
  const auto& sp = Spectral::for_grid(f.grid());
  return ScalarField(f.grid(), sp.inverse(sp.forward(f.values()) * sp.dealias_mask()));
}

VectorField dealias(const VectorField& v) {
  const auto& sp = Spectral::for_grid(v.grid());
  VectorField out(v.grid());
  for (int a = 0; a < v.dim(); ++a) out.col(a) = sp.inverse(sp.forward(v.col(a)) * sp.dealias_mask());
  return out;
}

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) {
  const ScalarField ta = dealias(a);
  const ScalarField tb = dealias(b);
  return dealias(ScalarField(a.grid(), ta.values() * tb.values()));
}

Eigen::ArrayXXd velocity_gradient(const VectorField& v) {
  const int d = v.dim();
  Eigen::ArrayXXd out(v.data().rows(), d * d);
  for (int i = 0; i < d; ++i) {
    const VectorField g = gradient(v.component(i));
    for (int j = 0; j < d; ++j) out.col(i * d + j) = g.col(j);
  }
  return out;
}

ScalarField advective_derivative(const VectorField& a, const ScalarField& b) {
  const auto& sp = Spectral::for_grid(a.grid());
  const VectorField ta = dealias(a);
  const VectorField gb = gradient(dealias(b));
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(a.data().rows());
  for (int j = 0; j < a.dim(); ++j) acc += ta.col(j) * gb.col(j);
  return ScalarField(a.grid(), sp.inverse(sp.forward(acc) * sp.dealias_mask()));
}

VectorField advective_derivative(const VectorField& a, const VectorField& b) {
  VectorField out(a.grid());
  for (int i = 0; i < a.dim(); ++i) out.col(i) = advective_derivative(a, b.component(i)).values();
  return out;
}

double mean(const ScalarField& f) { return f.values().sum() / static_cast<double>(f.values().size()); }

}  // namespace steuler
