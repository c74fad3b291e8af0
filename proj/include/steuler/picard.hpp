#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "steuler/elliptic.hpp"
#include "steuler/fields.hpp"
#include "steuler/noise.hpp"
#include "steuler/transport.hpp"

namespace steuler {

enum class Regime { multiplicative, additive, deterministic };
enum class InitialIterate { zero, projected };

const char* to_string(Regime r);
Regime parse_regime(const std::string& s);

struct PicardConfig {
  double p = 4.0;
  double picard_tol = 1e-8;
  int k_max = 30;
  EllipticConfig elliptic;
  TransportOptions transport;
  double overshoot_factor = 1.0;
  double bound_slack = 0.05;
  InitialIterate initial_iterate = InitialIterate::zero;
  /// Declared ball radius. When unset, A = 8 (1 + |v0|_{2,p}) is used for
  /// the stopping time and the ball check is reported, not asserted.
  std::optional<double> A;
  bool use_stopping_time = true;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
};

struct ProblemSetup {
  ScalarField rho0;
  VectorField v0;
  double t_horizon = 0.1;
  int n_steps = 64;
  PicardConfig cfg;
};

struct StoppingTimeResult {
  double tau = 0.0;
  Eigen::ArrayXd criterion_trace;  // functional at each path node
  bool capped = false;
};

/// tau = inf{t : int_0^t exp(-W) ds >= A^-2} ^ T_run. The integral is the
/// trapezoid rule on the path nodes; the crossing is linearly interpolated.
StoppingTimeResult stopping_time_multiplicative(const ExpFactor& factor, double A, double t_run);
/// First crossing of 1/3 by (c1 v c2 v 1) A^2 t + c3 e int_0^t |W^Q|_{k,2} ds + c3 A^-1 |W^Q(t)|_{k,2}.
StoppingTimeResult stopping_time_additive(const Eigen::ArrayXd& qw_norms, const TimeGrid& time, double A,
                                          double t_run, double c1 = 1.0, double c2 = 1.0, double c3 = 1.0);

/// Noise evaluated on the run time grid.
struct NoiseContext {
  Regime regime = Regime::deterministic;
  TimeGrid time;
  Eigen::ArrayXd z;      // exp(W), ones unless multiplicative
  Eigen::ArrayXd z_inv;  // exp(-W)
  std::optional<VectorSeries> wq;  // additive only
};

/// Noise of the given regime on the run grid (paths are linearly resampled).
NoiseContext make_noise_context(Regime regime, const TimeGrid& run_time, const BrownianPath* path,
                                const QWienerPath* qpath);

/// One Picard iterate. In the multiplicative regime v holds v-tilde.
struct IterationState {
  int k = 0;
  ScalarSeries rho;
  VectorSeries grad_pi;
  VectorSeries u;
  VectorSeries v;
  VectorSeries advecting;  // field that transported rho and u in this sweep
  Eigen::ArrayXd diff_norms;  // |v^(k) - v^(k-1)|_{1,p} per node
  double diff_sup = 0.0;
};

struct IterationRecord {
  int k = 0;
  double d = 0.0;            // sup_t |w^(k)|_{1,p}
  double sigma = 0.0;        // sup_t |rho^(k) - rho^(k-1)|_{1,p}
  double grad_q = 0.0;       // sup_t |grad pi^(k) - grad pi^(k-1)|_{1,p}
  double L5 = 0.0;           // empirical constant of the sigma estimate
  double L6 = 0.0;           // empirical constant of the grad q estimate
  double K = 0.0;            // max_t |grad pi|_{2,p} / (z^-2 |v|_{2,p}^2)
  int max_cg_iterations = 0;
  double sup_v2p = 0.0;
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::vector<double> d;
  std::vector<double> ratios;        // d_{k+1} / d_k (0 when d_k = 0)
  std::vector<double> partial_sums;
  int k0 = 1;                        // 1-based start of the strictly decreasing tail
  bool monotone_tail = false;
  double max_ratio_from_2 = 0.0;     // max of d_{k+1}/d_k over k >= 2
  std::string diagnostic;
};

/// Needs at least one value. A sequence that reaches zero passes; a sequence
/// that stalls (d_{k+1} >= d_k > 0 at the end) fails.
ConvergenceReport monitor_convergence(const std::vector<double>& d);

struct BoundsReport {
  double A = 0.0;
  bool A_declared = false;
  double sup_v2p = 0.0;
  bool ball_pass = true;  // asserted only when A is declared
  double sup_grad_rho_1p = 0.0;
  double grad_rho_bound = 0.0;  // e * |grad rho0|_{1,p} * (1 + slack)
  bool grad_rho_within = true;  // reported
  MaxPrincipleReport max_principle;
  GradientBoundReport gradient_bound;
  double max_div = 0.0;  // max over frames of |div v|_inf / (1 + |v|_inf)
  bool div_pass = true;
  bool pass = true;
};

struct PhaseTiming {
  double transport = 0.0;
  double pressure = 0.0;
  double forcing = 0.0;
  double projection = 0.0;
  double norms = 0.0;
  double total = 0.0;
};

struct SolveReport {
  Regime regime = Regime::deterministic;
  bool converged = false;
  int iterations = 0;
  double final_diff = 0.0;
  double t_run = 0.0;
  StoppingTimeResult stopping;
  double A = 0.0;
  bool v0_projected = false;
  std::vector<IterationRecord> history;
  PhaseTiming timing;
  std::vector<std::string> notes;
};

struct RunResult {
  IterationState state;
  SolveReport report;
  NoiseContext noise;
  ProblemSetup setup;
};

/// One sweep of the scheme from the previous iterate's velocity.
IterationState picard_sweep(const ProblemSetup& setup, const NoiseContext& noise, const VectorSeries& prev_v,
                            PhaseTiming* timing = nullptr, IterationRecord* record = nullptr);

/// The drivers return unconverged results with converged = false; use
/// require_converged to turn that into NoConvergence. NonPositiveDensity and
/// CharacteristicBlowup propagate with the iteration index in the message.
RunResult run_multiplicative(const ProblemSetup& setup, const BrownianPath& path);
RunResult run_additive(const ProblemSetup& setup, const QWienerPath& path);
RunResult run_deterministic(const ProblemSetup& setup);
void require_converged(const RunResult& r);

/// Physical velocity: exp(-W) v-tilde in the multiplicative regime.
VectorSeries physical_velocity(const RunResult& r);

BoundsReport verify_bounds(const RunResult& r);

struct ResidualReport {
  Eigen::ArrayXd velocity;  // discrete L2 residual per interval
  Eigen::ArrayXd density;
  double velocity_sup = 0.0;
  double density_sup = 0.0;
};

/// Interval-centred residuals r_{n+1/2} = (f_{n+1} - f_n)/dt + (N_n + N_{n+1})/2
/// of the transformed velocity equation and the density equation.
ResidualReport check_spde_residual(const RunResult& r);

struct UniquenessReport {
  double difference = 0.0;  // sup_t |v_A - v_B|_{1,p}
  double limit = 0.0;       // 10 * picard_tol
  bool pass = false;
  bool both_converged = false;
};

/// Runs the regime from v^(0) = 0 and from v^(0) = P v0 and compares.
UniquenessReport uniqueness_harness(const ProblemSetup& setup, Regime regime, const BrownianPath* path,
                                    const QWienerPath* qpath);

}  // namespace steuler
