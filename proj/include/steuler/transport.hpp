#pragma once

#include <vector>

#include <Eigen/Core>

#include "steuler/errors.hpp"
#include "steuler/fields.hpp"
#include "steuler/interpolation.hpp"

namespace steuler {

struct TransportOptions {
  int substeps = 2;  // minimum RK4 steps per frame interval
  FootInterpolation interp = FootInterpolation::taylor;
  int taylor_order = 4;
  double max_step_cells = 0.25;  // cap on displacement per step, in grid cells
  double div_tol = 1e-8;         // relative divergence allowed in advecting frames
};

void validate(const TransportOptions& opts);

/// One backward RK4 step of the characteristics: the foot of the arrival
/// node x at time s_to is x + offset at time s_from.
struct FlowStep {
  int interval = 0;
  double s_from = 0.0;
  double s_to = 0.0;
  Eigen::ArrayXXd offset;  // (dim, points)
};

/// Characteristics of an advecting series, stored as composable steps.
/// Velocity is linear in time between frames.
struct FlowMap {
  GridSpec grid;
  TimeGrid time;
  std::vector<int> steps_per_interval;
  std::vector<FlowStep> steps;
  bool identity = false;  // advecting field identically zero
};

/// Throws CharacteristicBlowup on a non-finite foot and std::invalid_argument
/// if a frame's divergence exceeds div_tol * (1 + sup|v|).
FlowMap trace_characteristics(const VectorSeries& advecting, const TransportOptions& opts = {});

/// rho(t_n) on every node of the advecting time grid; rho(t_0) = rho0.
ScalarSeries advect_scalar(const ScalarField& rho0, const FlowMap& flow, const TransportOptions& opts = {});
ScalarSeries advect_scalar(const ScalarField& rho0, const VectorSeries& advecting, const TransportOptions& opts = {});

/// u along characteristics with u(0) = v0 and du/dt = forcing, the time
/// integral taken by the trapezoid rule on each step.
VectorSeries solve_forced_velocity(const VectorField& v0, const FlowMap& flow, const VectorSeries& forcing,
                                   const TransportOptions& opts = {});
VectorSeries solve_forced_velocity(const VectorField& v0, const VectorSeries& advecting, const VectorSeries& forcing,
                                   const TransportOptions& opts = {});

/// overshoot_factor * (M - m) * h^2.
double range_tolerance(double m, double M, const GridSpec& grid, double overshoot_factor);

struct MaxPrincipleReport {
  double m = 0.0;
  double M = 0.0;
  double range_tol = 0.0;
  double worst_violation = 0.0;  // largest excursion outside [m, M]
  bool pass = true;
  int node = 0;
  std::size_t point = 0;
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  double value = 0.0;
};

MaxPrincipleReport check_max_principle(const ScalarSeries& series, double m, double M, double range_tol);

struct GradientBoundReport {
  Eigen::ArrayXd lhs;  // sup_x |grad rho(t_n)|
  Eigen::ArrayXd rhs;  // sqrt(3) sup|grad rho0| exp(int_0^t sup_x |grad v| ds)
  double worst_ratio = 0.0;
  bool pass = true;
  Eigen::ArrayXd growth_exponent;  // log(|grad rho|_{1,p} / |grad rho0|_{1,p}) / int |v|_{2,p}
};

/// sup_x |grad v| uses the pointwise Frobenius norm of the velocity gradient;
/// time integrals use the trapezoid rule on the series nodes.
GradientBoundReport check_gradient_bound(const ScalarSeries& rho, const VectorSeries& advecting,
                                         const ScalarField& rho0, double bound_slack = 0.05, double p = 4.0);

}  // namespace steuler
