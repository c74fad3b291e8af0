#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Core>

#include "steuler/fields.hpp"

namespace steuler {

using MultiIndex = std::array<int, 3>;

/// All multi-indices m with |m| == order over the first dim axes, in
/// lexicographically descending order ((2,0), (1,1), (0,2) for dim 2).
std::vector<MultiIndex> multi_indices(int dim, int order);

/// FFT plans and wavenumber tables for one grid. Instances are cached per
/// grid and are safe to share between threads.
class Spectral {
 public:
  static const Spectral& for_grid(const GridSpec& grid);

  explicit Spectral(const GridSpec& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const GridSpec& grid() const { return grid_; }
  Eigen::Index spectral_size() const { return spectral_size_; }

  /// Unnormalised real-to-complex transform (half spectrum on the last axis).
  Eigen::ArrayXcd forward(const Eigen::ArrayXd& values) const;
  /// Inverse of forward, including the 1/N normalisation.
  Eigen::ArrayXd inverse(const Eigen::ArrayXcd& spectrum) const;

  /// Signed integer wavenumber along an axis for every spectral index.
  const Eigen::ArrayXd& mode(int axis) const { return mode_[axis]; }
  /// Physical wavenumber used for first derivatives; zero on the Nyquist row.
  const Eigen::ArrayXd& derivative_wavenumber(int axis) const { return k_eff_[axis]; }
  /// |k_eff|^2, so that divergence(gradient(f)) has symbol -k2.
  const Eigen::ArrayXd& k_squared() const { return k2_; }
  /// 1 where every |mode| <= n/3 (2/3 rule), else 0.
  const Eigen::ArrayXd& dealias_mask() const { return dealias_; }

  /// Spectral multiplier of D^m.
  Eigen::ArrayXcd derivative_symbol(const MultiIndex& m) const;

 private:
  GridSpec grid_;
  Eigen::Index spectral_size_ = 0;
  std::array<Eigen::ArrayXd, 3> mode_;
  std::array<Eigen::ArrayXd, 3> k_eff_;
  Eigen::ArrayXd k2_;
  Eigen::ArrayXd dealias_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

ScalarField derivative(const ScalarField& f, const MultiIndex& m);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// Spectral Laplacian with symbol -|k_eff|^2 (equal to divergence(gradient(f))).
ScalarField laplacian(const ScalarField& f);
/// Mean-zero solution of laplacian(phi) = rhs restricted to the range of the
/// Laplacian (the mean and pure-Nyquist modes of rhs are discarded).
ScalarField solve_poisson(const ScalarField& rhs);

/// 2/3-rule truncation.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& v);
/// Dealiased pointwise product: both factors and the result are truncated.
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);

/// Full velocity gradient: entry (i, j) of the result holds d_j v^i, stored
/// as component block i * dim + j of a (size x dim*dim) array.
Eigen::ArrayXXd velocity_gradient(const VectorField& v);

/// (a . grad) b, evaluated pointwise with spectral derivatives of b.
VectorField advective_derivative(const VectorField& a, const VectorField& b);
ScalarField advective_derivative(const VectorField& a, const ScalarField& b);

double mean(const ScalarField& f);

}  // namespace steuler
