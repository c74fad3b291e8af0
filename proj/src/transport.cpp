#include "steuler/transport.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "steuler/norms.hpp"
#include "steuler/parallel.hpp"
#include "steuler/spectral.hpp"

namespace steuler {

namespace {

using Evaluators = std::vector<std::unique_ptr<LocalEvaluator>>;

Evaluators component_evaluators(const VectorField& v, const TransportOptions& opts) {
  Evaluators out;
  for (int a = 0; a < v.dim(); ++a) out.push_back(make_evaluator(v.component(a), opts.interp, opts.taylor_order));
  return out;
}

double max_speed(const VectorField& v) { return v.data().rowwise().norm().maxCoeff(); }

void check_frames(const VectorSeries& s, const char* what) {
  validate(s);
  if (s.nodes() < 2) throw std::invalid_argument(std::string(what) + " needs at least two time nodes");
}

}  // namespace

void validate(const TransportOptions& opts) {
  if (opts.substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (opts.taylor_order < 1 || opts.taylor_order > 8) throw std::invalid_argument("taylor_order must be in [1, 8]");
  if (!(opts.max_step_cells > 0.0)) throw std::invalid_argument("max_step_cells must be positive");
  if (!(opts.div_tol > 0.0)) throw std::invalid_argument("div_tol must be positive");
}

FlowMap trace_characteristics(const VectorSeries& advecting, const TransportOptions& opts) {
  validate(opts);
  check_frames(advecting, "trace_characteristics");
  const GridSpec& g = advecting.grid();
  const int d = g.dim;
  const auto points = g.size();
  const TimeGrid& time = advecting.time;

  FlowMap flow;
  flow.grid = g;
  flow.time = time;
  flow.identity = true;
  for (const auto& f : advecting.frames) {
    if (!f.all_finite()) throw CharacteristicBlowup("advecting field is not finite");
    if ((f.data() != 0.0).any()) flow.identity = false;
  }
  if (flow.identity) {
    flow.steps_per_interval.assign(time.n_steps, 0);
    return flow;
  }
  for (int n = 0; n < time.nodes(); ++n) {
    const double div = sup_norm(divergence(advecting[n]));
    const double scale = 1.0 + sup_norm(advecting[n]);
    if (div > opts.div_tol * scale) {
      std::ostringstream os;
      os << "advecting frame " << n << " has divergence " << div << " above div_tol";
      throw std::invalid_argument(os.str());
    }
  }

  const double dt = time.dt();
  const double h = g.spacing();
  Evaluators prev = component_evaluators(advecting[0], opts);
  for (int n = 1; n <= time.n_steps; ++n) {
    Evaluators next = component_evaluators(advecting[n], opts);
    const double vmax = std::max(max_speed(advecting[n - 1]), max_speed(advecting[n]));
    const int S = std::max(opts.substeps, static_cast<int>(std::ceil(dt * vmax / (opts.max_step_cells * h))));
    flow.steps_per_interval.push_back(S);
    const double t0 = time.t(n - 1);
    const double delta = dt / S;
    for (int j = 1; j <= S; ++j) {
      FlowStep step;
      step.interval = n;
      step.s_from = t0 + (j - 1) * delta;
      step.s_to = j == S ? time.t(n) : t0 + j * delta;
      step.offset.resize(d, static_cast<Eigen::Index>(points));
      const double th_to = static_cast<double>(j) / S;
      const double th_mid = (j - 0.5) / S;
      const double th_from = static_cast<double>(j - 1) / S;
      parallel_for(points, [&](std::size_t begin, std::size_t end) {
        auto vel = [&](std::size_t i, double th, const double* off, double* out) {
          for (int a = 0; a < d; ++a) out[a] = (1.0 - th) * prev[a]->at(i, off) + th * next[a]->at(i, off);
        };
        double k1[3], k2[3], k3[3], k4[3], o[3] = {0, 0, 0};
        for (std::size_t i = begin; i < end; ++i) {
          o[0] = o[1] = o[2] = 0.0;
          vel(i, th_to, o, k1);
          for (int a = 0; a < d; ++a) o[a] = -0.5 * delta * k1[a];
          vel(i, th_mid, o, k2);
          for (int a = 0; a < d; ++a) o[a] = -0.5 * delta * k2[a];
          vel(i, th_mid, o, k3);
          for (int a = 0; a < d; ++a) o[a] = -delta * k3[a];
          vel(i, th_from, o, k4);
          for (int a = 0; a < d; ++a)
            step.offset(a, static_cast<Eigen::Index>(i)) = -delta / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
      });
      if (!step.offset.allFinite()) {
        std::ostringstream os;
        os << "characteristic foot is not finite in interval " << n;
        throw CharacteristicBlowup(os.str());
      }
      flow.steps.push_back(std::move(step));
    }
    prev = std::move(next);
  }
  return flow;
}

ScalarSeries advect_scalar(const ScalarField& rho0, const FlowMap& flow, const TransportOptions& opts) {
  validate(opts);
  if (!(rho0.grid() == flow.grid)) throw std::invalid_argument("advect_scalar: grids differ");
  ScalarSeries out(flow.time, std::vector<ScalarField>{rho0});
  if (flow.identity) {
    out.frames.assign(flow.time.nodes(), rho0);
    return out;
  }
  ScalarField cur = rho0;
  const auto points = flow.grid.size();
  for (std::size_t s = 0; s < flow.steps.size(); ++s) {
    const FlowStep& step = flow.steps[s];
    const auto ev = make_evaluator(cur, opts.interp, opts.taylor_order);
    ScalarField next(flow.grid);
    parallel_for(points, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i)
        next.values()[static_cast<Eigen::Index>(i)] = ev->at(i, &step.offset(0, static_cast<Eigen::Index>(i)));
    });
    cur = std::move(next);
    if (s + 1 == flow.steps.size() || flow.steps[s + 1].interval != step.interval) out.frames.push_back(cur);
  }
  return out;
}

ScalarSeries advect_scalar(const ScalarField& rho0, const VectorSeries& advecting, const TransportOptions& opts) {
  return advect_scalar(rho0, trace_characteristics(advecting, opts), opts);
}

VectorSeries solve_forced_velocity(const VectorField& v0, const FlowMap& flow, const VectorSeries& forcing,
                                   const TransportOptions& opts) {
  validate(opts);
  validate(forcing);
  if (!(v0.grid() == flow.grid) || !(forcing.grid() == flow.grid) || !(forcing.time == flow.time))
    throw std::invalid_argument("solve_forced_velocity: grids differ");
  const GridSpec& g = flow.grid;
  const int d = g.dim;
  const TimeGrid& time = flow.time;
  VectorSeries out(time, std::vector<VectorField>{v0});
  VectorField cur = v0;

  auto forcing_at = [&](int n, double th) {
    if (th == 0.0) return forcing[n - 1].data();
    if (th == 1.0) return forcing[n].data();
    return Eigen::ArrayXXd((1.0 - th) * forcing[n - 1].data() + th * forcing[n].data());
  };

  const auto points = g.size();
  std::size_t s = 0;
  for (int n = 1; n <= time.n_steps; ++n) {
    const double dt = time.dt();
    if (flow.identity) {
      const int S = std::max(opts.substeps, 1);
      const double delta = dt / S;
      for (int j = 1; j <= S; ++j) {
        const Eigen::ArrayXXd f0 = forcing_at(n, static_cast<double>(j - 1) / S);
        const Eigen::ArrayXXd f1 = forcing_at(n, static_cast<double>(j) / S);
        cur.data() = (cur.data() + (0.5 * delta) * f0) + (0.5 * delta) * f1;
      }
      out.frames.push_back(cur);
      continue;
    }
    const int S = flow.steps_per_interval[n - 1];
    for (int j = 1; j <= S; ++j, ++s) {
      const FlowStep& step = flow.steps[s];
      const double delta = step.s_to - step.s_from;
      const Eigen::ArrayXXd f0 = forcing_at(n, static_cast<double>(j - 1) / S);
      const Eigen::ArrayXXd f1 = forcing_at(n, static_cast<double>(j) / S);
      const VectorField carried(g, cur.data() + (0.5 * delta) * f0);
      const Evaluators ev = component_evaluators(carried, opts);
      VectorField next(g);
      parallel_for(points, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          for (int a = 0; a < d; ++a) next.col(a)[ii] = ev[a]->at(i, &step.offset(0, ii)) + (0.5 * delta) * f1(ii, a);
        }
      });
      cur = std::move(next);
    }
    out.frames.push_back(cur);
  }
  return out;
}

VectorSeries solve_forced_velocity(const VectorField& v0, const VectorSeries& advecting, const VectorSeries& forcing,
                                   const TransportOptions& opts) {
  return solve_forced_velocity(v0, trace_characteristics(advecting, opts), forcing, opts);
}

double range_tolerance(double m, double M, const GridSpec& grid, double overshoot_factor) {
  const double h = grid.spacing();
  return overshoot_factor * (M - m) * h * h;
}

MaxPrincipleReport check_max_principle(const ScalarSeries& series, double m, double M, double range_tol) {
  MaxPrincipleReport r;
  r.m = m;
  r.M = M;
  r.range_tol = range_tol;
  r.worst_violation = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < series.nodes(); ++n) {
    const auto& v = series[n].values();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double excess = std::max(m - v[i], v[i] - M);
      if (excess > r.worst_violation || !std::isfinite(v[i])) {
        r.worst_violation = std::isfinite(v[i]) ? excess : std::numeric_limits<double>::infinity();
        r.node = n;
        r.point = static_cast<std::size_t>(i);
        r.value = v[i];
      }
    }
  }
  r.worst_violation = std::max(r.worst_violation, 0.0);
  r.location = series.grid().position(r.point);
  r.pass = r.worst_violation <= range_tol;
  return r;
}

GradientBoundReport check_gradient_bound(const ScalarSeries& rho, const VectorSeries& advecting,
                                         const ScalarField& rho0, double bound_slack, double p) {
  validate(rho);
  validate(advecting);
  if (!(rho.time == advecting.time)) throw std::invalid_argument("check_gradient_bound: time grids differ");
  const int N = rho.nodes();
  const double dt = rho.time.dt();
  GradientBoundReport r;
  r.lhs.resize(N);
  r.rhs.resize(N);
  r.growth_exponent.resize(N);
  const VectorField g0 = gradient(rho0);
  const double sup0 = sup_norm(g0);
  const double s0 = sobolev_norm(g0, 1, p);
  double integral = 0.0, integral_2p = 0.0, prev_grad = 0.0, prev_2p = 0.0;
  for (int n = 0; n < N; ++n) {
    const Eigen::ArrayXXd J = velocity_gradient(advecting[n]);
    const double grad_v = J.square().rowwise().sum().sqrt().maxCoeff();
    const double v2p = sobolev_norm(advecting[n], 2, p);
    if (n > 0) {
      integral += 0.5 * dt * (prev_grad + grad_v);
      integral_2p += 0.5 * dt * (prev_2p + v2p);
    }
    prev_grad = grad_v;
    prev_2p = v2p;
    const VectorField gr = gradient(rho[n]);
    r.lhs[n] = sup_norm(gr);
    r.rhs[n] = std::sqrt(3.0) * sup0 * std::exp(integral);
    const double ratio = r.rhs[n] > 0.0 ? r.lhs[n] / r.rhs[n] : (r.lhs[n] > 0.0 ? INFINITY : 0.0);
    r.worst_ratio = std::max(r.worst_ratio, ratio);
    if (r.lhs[n] > r.rhs[n] * (1.0 + bound_slack)) r.pass = false;
    const double sn = sobolev_norm(gr, 1, p);
    r.growth_exponent[n] =
        (integral_2p > 0.0 && s0 > 0.0 && sn > 0.0) ? std::log(sn / s0) / integral_2p : std::nan("");
  }
  return r;
}

}  // namespace steuler
