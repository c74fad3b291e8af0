#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "steuler/fields.hpp"

namespace steuler {

/// Scalar Brownian motion sampled on a uniform time grid, w(0) = 0.
struct BrownianPath {
  TimeGrid time;
  Eigen::ArrayXd w;
  std::uint64_t seed = 0;

  /// Piecewise-linear value at time t in [0, t_end].
  double at(double t) const;
};

/// w(t_{i+1}) = w(t_i) + sqrt(dt) * standard_normal(seed, 0, i).
BrownianPath sample_brownian(double t_end, int n_steps, std::uint64_t seed);
BrownianPath zero_brownian(double t_end, int n_steps);
/// Linear interpolation onto another grid whose horizon is at most the path's.
BrownianPath resample(const BrownianPath& path, const TimeGrid& time);
/// Keeps every factor-th node; n_steps must be divisible by factor.
BrownianPath coarsen(const BrownianPath& path, int factor);

struct ExpFactor {
  TimeGrid time;
  Eigen::ArrayXd z;      // exp(w)
  Eigen::ArrayXd z_inv;  // exp(-w)
};

/// Throws std::overflow_error if any |w| > 700.
ExpFactor exp_factor(const BrownianPath& path);

struct QWienerSpec {
  int mode_count = 8;
  double decay_exponent = 4.0;  // lambda_j = lambda_scale * j^-s
  double smoothness_k = 3.0;
  double lambda_scale = 1.0;
};

/// One divergence-free trigonometric field d * cos(kappa.x) or d * sin(kappa.x)
/// with integer wavevector kappa and unit d orthogonal to kappa.
struct QMode {
  std::array<int, 3> kappa{0, 0, 0};
  Eigen::Vector3d direction = Eigen::Vector3d::Zero();
  bool sine = false;
};

/// Number of basis modes whose wavevector survives the 2/3 rule.
int mode_budget(const GridSpec& grid);
/// First count basis modes ordered by |kappa| (ties broken lexicographically,
/// cosine before sine). Throws std::invalid_argument if count exceeds the budget.
std::vector<QMode> divergence_free_basis(const GridSpec& grid, int count);
VectorField basis_field(const GridSpec& grid, const QMode& mode);

struct QWienerPath {
  GridSpec grid;
  TimeGrid time;
  QWienerSpec spec;
  std::uint64_t seed = 0;
  std::vector<QMode> modes;
  Eigen::ArrayXd lambda;  // (M)
  Eigen::ArrayXXd beta;   // (nodes, M) scalar Brownian coefficients
  VectorSeries frames;

  /// (sum_j lambda_j (1 + |kappa_j|^2)^k beta_j(t)^2)^(1/2) per node.
  Eigen::ArrayXd surrogate_norms() const;
};

/// W^Q(t) = sum_j sqrt(lambda_j) beta_j(t) e_j, with beta_j drawn from
/// stream j (j = 1..M) of the counter-based generator.
QWienerPath sample_q_wiener(const GridSpec& grid, const QWienerSpec& spec, double t_end, int n_steps,
                            std::uint64_t seed);
QWienerPath zero_q_wiener(const GridSpec& grid, const QWienerSpec& spec, double t_end, int n_steps);
/// Rebuilds frames from given coefficients.
QWienerPath assemble_q_wiener(const GridSpec& grid, const QWienerSpec& spec, const TimeGrid& time,
                              Eigen::ArrayXXd beta, std::uint64_t seed);
/// Linear interpolation of the coefficients, frames rebuilt.
QWienerPath resample(const QWienerPath& path, const TimeGrid& time);

void write_path(const std::filesystem::path& stem, const BrownianPath& path);
void write_path(const std::filesystem::path& stem, const QWienerPath& path);
BrownianPath read_brownian(const std::filesystem::path& stem);
QWienerPath read_q_wiener(const std::filesystem::path& stem);

/// Heun (Stratonovich midpoint) integration of dv = -v o dW along a path.
Eigen::ArrayXd integrate_stratonovich_reduction(const BrownianPath& path, double v0);

struct StratonovichReport {
  int n_steps = 0;
  double max_deviation = 0.0;  // max_t |v(t) - v0 exp(-W(t))|
};

StratonovichReport verify_stratonovich_reduction(std::uint64_t seed, int n_steps, double v0 = 1.0,
                                                 double t_end = 1.0);
StratonovichReport verify_stratonovich_reduction(const BrownianPath& path, double v0);

struct StrongOrderStudy {
  std::vector<int> n_steps;         // coarse to fine
  std::vector<double> mean_error;   // mean over paths of max deviation
  std::vector<double> ratios;       // mean_error[i] / mean_error[i+1]
  double mean_ratio = 0.0;
};

/// Nested refinements: each path is sampled at the finest level and coarsened,
/// so all levels see the same Brownian path.
StrongOrderStudy stratonovich_order_study(std::uint64_t first_seed, int paths, int base_steps,
                                          int levels, double v0 = 1.0, double t_end = 1.0);

}  // namespace steuler
