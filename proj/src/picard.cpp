#include "steuler/picard.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "steuler/norms.hpp"
#include "steuler/parallel.hpp"
#include "steuler/spectral.hpp"

namespace steuler {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double default_A(const VectorField& v0, double p) { return 8.0 * (1.0 + sobolev_norm(v0, 2, p)); }

double relative_divergence(const VectorField& v) {
  return sup_norm(divergence(v)) / (1.0 + sup_norm(v));
}

// Crossing of a nondecreasing-at-crossing node sequence; tau in units of the grid.
StoppingTimeResult crossing(const Eigen::ArrayXd& trace, const TimeGrid& time, double threshold, double t_run) {
  StoppingTimeResult r;
  r.criterion_trace = trace;
  r.tau = t_run;
  r.capped = true;
  for (int n = 1; n < time.nodes(); ++n) {
    if (trace[n] >= threshold) {
      const double frac = (threshold - trace[n - 1]) / (trace[n] - trace[n - 1]);
      const double tau = (n - 1 + frac) * time.t_end / time.n_steps;
      if (tau < t_run) {
        r.tau = tau;
        r.capped = false;
      }
      return r;
    }
  }
  return r;
}

VectorSeries constant_series(const TimeGrid& t, const VectorField& f) { return VectorSeries(t, f); }

template <typename Fn>
auto with_context(int k, const char* phase, Fn&& fn) -> decltype(fn()) {
  auto prefix = [&](const std::exception& e) {
    std::ostringstream os;
    os << "picard iteration " << k << ", " << phase << ": " << e.what();
    return os.str();
  };
  try {
    return fn();
  } catch (const NonPositiveDensity& e) {
    throw NonPositiveDensity(prefix(e));
  } catch (const CharacteristicBlowup& e) {
    throw CharacteristicBlowup(prefix(e));
  } catch (const NoConvergence& e) {
    throw NoConvergence(prefix(e), e.residual);
  }
}

NoiseContext context_for(Regime regime, const TimeGrid& run_time) {
  NoiseContext c;
  c.regime = regime;
  c.time = run_time;
  c.z = Eigen::ArrayXd::Ones(run_time.nodes());
  c.z_inv = Eigen::ArrayXd::Ones(run_time.nodes());
  return c;
}

struct Prepared {
  ProblemSetup setup;
  bool projected = false;
  double A = 0.0;
};

Prepared prepare(const ProblemSetup& in) {
  Prepared p{in, false, 0.0};
  const auto& cfg = in.cfg;
  if (!(cfg.p > 1.0)) throw std::invalid_argument("p must exceed 1");
  if (!(cfg.picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
  if (cfg.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (!(in.t_horizon > 0.0) || in.n_steps < 1) throw std::invalid_argument("time horizon and n_steps must be positive");
  if (!(in.rho0.grid() == in.v0.grid())) throw std::invalid_argument("rho0 and v0 grids differ");
  if (!(in.rho0.values().minCoeff() > 0.0)) throw NonPositiveDensity("initial density must be positive");
  if (!in.v0.all_finite() || !in.rho0.all_finite()) throw std::invalid_argument("initial data must be finite");
  if (relative_divergence(in.v0) > 1e-10) {
    p.setup.v0 = leray_project(in.v0).v;
    p.projected = true;
  }
  p.A = cfg.A ? *cfg.A : default_A(p.setup.v0, cfg.p);
  if (!(p.A > 1.0)) throw std::invalid_argument("A must exceed 1");
  return p;
}

RunResult iterate(const Prepared& prep, NoiseContext noise, StoppingTimeResult stopping) {
  const auto t_start = Clock::now();
  const ProblemSetup& setup = prep.setup;
  const auto& cfg = setup.cfg;
  RunResult out;
  out.setup = setup;
  out.report.regime = noise.regime;
  out.report.t_run = noise.time.t_end;
  out.report.stopping = std::move(stopping);
  out.report.A = prep.A;
  out.report.v0_projected = prep.projected;
  if (prep.projected) out.report.notes.push_back("v0 was not divergence-free and was Leray-projected");
  if (cfg.use_stopping_time && !out.report.stopping.capped)
    out.report.notes.push_back("run horizon is the stopping time tau");
  if (!cfg.use_stopping_time && out.report.stopping.tau < setup.t_horizon)
    out.report.notes.push_back("stopping time ignored: ball containment is untested beyond tau");

  const TimeGrid& time = noise.time;
  VectorSeries prev_v = cfg.initial_iterate == InitialIterate::zero
                            ? constant_series(time, VectorField(setup.v0.grid()))
                            : constant_series(time, leray_project(setup.v0).v);
  IterationState prev;
  bool have_prev = false;
  for (int k = 1; k <= cfg.k_max; ++k) {
    IterationRecord rec;
    rec.k = k;
    const auto t_iter = Clock::now();
    IterationState state = picard_sweep(setup, noise, prev_v, &out.report.timing, &rec);
    state.k = k;

    const auto t_norms = Clock::now();
    const int N = time.nodes();
    Eigen::ArrayXd sigma(N), gq(N);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
      for (std::size_t n = b; n < e; ++n) {
        const int i = static_cast<int>(n);
        sigma[i] = sobolev_norm(state.rho[i] - (have_prev ? prev.rho[i] : setup.rho0), 1, cfg.p);
        gq[i] = have_prev ? sobolev_norm(state.grad_pi[i] - prev.grad_pi[i], 1, cfg.p) : sobolev_norm(state.grad_pi[i], 1, cfg.p);
      }
    });
    rec.sigma = sigma.maxCoeff();
    rec.grad_q = gq.maxCoeff();
    rec.L5 = std::numeric_limits<double>::quiet_NaN();
    rec.L6 = std::numeric_limits<double>::quiet_NaN();
    if (have_prev) {
      double integral = 0.0, l5 = 0.0, l6 = 0.0;
      bool any5 = false, any6 = false;
      for (int n = 0; n < N; ++n) {
        if (n > 0)
          integral += 0.5 * time.dt() *
                      (noise.z_inv[n - 1] * prev.diff_norms[n - 1] + noise.z_inv[n] * prev.diff_norms[n]);
        if (integral > 0.0) {
          l5 = std::max(l5, sigma[n] / integral);
          any5 = true;
        }
        const double den = sigma[n] + noise.z_inv[n] * noise.z_inv[n] * prev.diff_norms[n];
        if (den > 0.0) {
          l6 = std::max(l6, gq[n] / den);
          any6 = true;
        }
      }
      if (any5) rec.L5 = l5;
      if (any6) rec.L6 = l6;
    }
    out.report.timing.norms += seconds_since(t_norms);
    rec.d = state.diff_sup;
    rec.seconds = seconds_since(t_iter);
    out.report.history.push_back(rec);
    out.report.iterations = k;
    out.report.final_diff = state.diff_sup;

    const bool done = state.diff_sup <= cfg.picard_tol;
    prev_v = state.v;
    prev = std::move(state);
    have_prev = true;
    if (done) {
      out.report.converged = true;
      break;
    }
  }
  out.state = std::move(prev);
  out.noise = std::move(noise);
  out.report.timing.total = seconds_since(t_start);
  return out;
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::multiplicative: return "multiplicative";
    case Regime::additive: return "additive";
    case Regime::deterministic: return "deterministic";
  }
  return "?";
}

Regime parse_regime(const std::string& s) {
  if (s == "multiplicative") return Regime::multiplicative;
  if (s == "additive") return Regime::additive;
  if (s == "deterministic") return Regime::deterministic;
  throw std::invalid_argument("unknown regime '" + s + "' (multiplicative, additive or deterministic)");
}

StoppingTimeResult stopping_time_multiplicative(const ExpFactor& factor, double A, double t_run) {
  if (!(A > 1.0)) throw std::invalid_argument("A must exceed 1");
  const TimeGrid& time = factor.time;
  // Running trapezoid sums in units of dt keep the zero-noise integral exact.
  Eigen::ArrayXd sums(time.nodes());
  sums[0] = 0.0;
  for (int n = 1; n < time.nodes(); ++n) sums[n] = sums[n - 1] + 0.5 * (factor.z_inv[n - 1] + factor.z_inv[n]);
  StoppingTimeResult r = crossing(sums, time, 1.0 / (A * A) / time.dt(), t_run);
  r.criterion_trace = sums * time.dt();
  return r;
}

StoppingTimeResult stopping_time_additive(const Eigen::ArrayXd& qw_norms, const TimeGrid& time, double A,
                                          double t_run, double c1, double c2, double c3) {
  if (!(A > 1.0)) throw std::invalid_argument("A must exceed 1");
  if (qw_norms.size() != time.nodes()) throw std::invalid_argument("qw_norms size does not match the time grid");
  const double C = std::max({c1, c2, 1.0});
  Eigen::ArrayXd trace(time.nodes());
  double integral = 0.0;
  for (int n = 0; n < time.nodes(); ++n) {
    if (n > 0) integral += 0.5 * time.dt() * (qw_norms[n - 1] + qw_norms[n]);
    trace[n] = C * A * A * time.t(n) + c3 * std::numbers::e * integral + c3 / A * qw_norms[n];
  }
  return crossing(trace, time, 1.0 / 3.0, t_run);
}

NoiseContext make_noise_context(Regime regime, const TimeGrid& run_time, const BrownianPath* path,
                                const QWienerPath* qpath) {
  NoiseContext ctx = context_for(regime, run_time);
  if (regime == Regime::multiplicative) {
    if (!path) throw std::invalid_argument("multiplicative regime needs a Brownian path");
    const ExpFactor ef = exp_factor(resample(*path, run_time));
    ctx.z = ef.z;
    ctx.z_inv = ef.z_inv;
  } else if (regime == Regime::additive) {
    if (!qpath) throw std::invalid_argument("additive regime needs a Q-Wiener path");
    ctx.wq = qpath->time == run_time ? qpath->frames : resample(*qpath, run_time).frames;
  }
  return ctx;
}

IterationState picard_sweep(const ProblemSetup& setup, const NoiseContext& noise, const VectorSeries& prev_v,
                            PhaseTiming* timing, IterationRecord* record) {
  const auto& cfg = setup.cfg;
  const TimeGrid& time = noise.time;
  const GridSpec& grid = setup.v0.grid();
  const int N = time.nodes();
  const int d = grid.dim;
  const bool additive = noise.regime == Regime::additive;
  const int k = record ? record->k : 0;
  PhaseTiming local;
  PhaseTiming& tm = timing ? *timing : local;

  IterationState s;
  auto t0 = Clock::now();
  s.advecting = VectorSeries(time, VectorField(grid));
  for (int n = 0; n < N; ++n) s.advecting[n].data() = noise.z_inv[n] * prev_v[n].data();
  const FlowMap flow = with_context(k, "transport", [&] { return trace_characteristics(s.advecting, cfg.transport); });
  s.rho = with_context(k, "transport", [&] { return advect_scalar(setup.rho0, flow, cfg.transport); });
  tm.transport += seconds_since(t0);

  t0 = Clock::now();
  s.grad_pi = VectorSeries(time, VectorField(grid));
  std::vector<int> cg(N, 0);
  Eigen::ArrayXd K = Eigen::ArrayXd::Zero(N);
  with_context(k, "pressure", [&] {
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
      for (std::size_t nn = b; nn < e; ++nn) {
        const int n = static_cast<int>(nn);
        const double zi2 = noise.z_inv[n] * noise.z_inv[n];
        const ScalarField rhs = additive ? assemble_pressure_rhs_additive(prev_v[n])
                                         : assemble_pressure_rhs_multiplicative(prev_v[n], zi2);
        PressureSolution sol = solve_pressure(s.rho[n], rhs, cfg.elliptic);
        cg[n] = sol.iterations;
        s.grad_pi[n] = std::move(sol.grad_pi);
        if (record) {
          const double vn = sobolev_norm(prev_v[n], 2, cfg.p);
          if (vn > 0.0) K[n] = sobolev_norm(s.grad_pi[n], 2, cfg.p) / (zi2 * vn * vn);
        }
      }
    });
    return 0;
  });
  tm.pressure += seconds_since(t0);

  t0 = Clock::now();
  VectorSeries forcing(time, VectorField(grid));
  for (int n = 0; n < N; ++n) {
    const auto& rho = s.rho[n].values();
    for (int a = 0; a < d; ++a) forcing[n].col(a) = -(noise.z[n] * s.grad_pi[n].col(a)) / rho;
    if (additive && ((*noise.wq)[n].data() != 0.0).any())
      forcing[n].data() -= advective_derivative(prev_v[n], (*noise.wq)[n]).data();
  }
  tm.forcing += seconds_since(t0);

  t0 = Clock::now();
  s.u = with_context(k, "forced transport",
                     [&] { return solve_forced_velocity(setup.v0, flow, forcing, cfg.transport); });
  tm.transport += seconds_since(t0);

  t0 = Clock::now();
  s.v = VectorSeries(time, VectorField(grid));
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t nn = b; nn < e; ++nn) {
      const int n = static_cast<int>(nn);
      s.v[n] = leray_project(s.u[n]).v;
      if (additive) s.v[n].data() += (*noise.wq)[n].data();
    }
  });
  tm.projection += seconds_since(t0);

  t0 = Clock::now();
  s.diff_norms.resize(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t nn = b; nn < e; ++nn) {
      const int n = static_cast<int>(nn);
      s.diff_norms[n] = sobolev_norm(s.v[n] - prev_v[n], 1, cfg.p);
    }
  });
  s.diff_sup = s.diff_norms.maxCoeff();
  if (record) {
    record->K = K.maxCoeff();
    record->max_cg_iterations = *std::max_element(cg.begin(), cg.end());
    double sup = 0.0;
    for (int n = 0; n < N; ++n) sup = std::max(sup, sobolev_norm(s.v[n], 2, cfg.p));
    record->sup_v2p = sup;
  }
  tm.norms += seconds_since(t0);
  return s;
}

RunResult run_multiplicative(const ProblemSetup& setup, const BrownianPath& path) {
  const Prepared prep = prepare(setup);
  if (path.time.t_end < setup.t_horizon * (1.0 - 1e-14))
    throw std::invalid_argument("Brownian path is shorter than the run horizon");
  const StoppingTimeResult st = stopping_time_multiplicative(exp_factor(path), prep.A, setup.t_horizon);
  const double t_run = setup.cfg.use_stopping_time ? st.tau : setup.t_horizon;
  const TimeGrid run_time{t_run, setup.n_steps};
  return iterate(prep, make_noise_context(Regime::multiplicative, run_time, &path, nullptr), st);
}

RunResult run_additive(const ProblemSetup& setup, const QWienerPath& path) {
  const Prepared prep = prepare(setup);
  if (!(path.grid == setup.v0.grid())) throw std::invalid_argument("Q-Wiener path grid differs from the run grid");
  if (path.time.t_end < setup.t_horizon * (1.0 - 1e-14))
    throw std::invalid_argument("Q-Wiener path is shorter than the run horizon");
  const auto& c = setup.cfg;
  const StoppingTimeResult st =
      stopping_time_additive(path.surrogate_norms(), path.time, prep.A, setup.t_horizon, c.c1, c.c2, c.c3);
  const double t_run = c.use_stopping_time ? st.tau : setup.t_horizon;
  const TimeGrid run_time{t_run, setup.n_steps};
  return iterate(prep, make_noise_context(Regime::additive, run_time, nullptr, &path), st);
}

RunResult run_deterministic(const ProblemSetup& setup) {
  const Prepared prep = prepare(setup);
  const BrownianPath zero = zero_brownian(setup.t_horizon, setup.n_steps);
  const StoppingTimeResult st = stopping_time_multiplicative(exp_factor(zero), prep.A, setup.t_horizon);
  const double t_run = setup.cfg.use_stopping_time ? st.tau : setup.t_horizon;
  RunResult r = iterate(prep, context_for(Regime::deterministic, TimeGrid{t_run, setup.n_steps}), st);
  return r;
}

void require_converged(const RunResult& r) {
  if (r.report.converged) return;
  std::ostringstream os;
  os << "Picard iteration did not converge in " << r.report.iterations << " iterations; d_k history:";
  for (const auto& h : r.report.history) os << ' ' << h.d;
  throw NoConvergence(os.str(), r.report.final_diff);
}

VectorSeries physical_velocity(const RunResult& r) {
  if (r.noise.regime != Regime::multiplicative) return r.state.v;
  VectorSeries out = r.state.v;
  for (int n = 0; n < out.nodes(); ++n) out[n].data() *= r.noise.z_inv[n];
  return out;
}

ConvergenceReport monitor_convergence(const std::vector<double>& d) {
  if (d.empty()) throw std::invalid_argument("monitor_convergence needs at least one value");
  ConvergenceReport r;
  r.d = d;
  const int K = static_cast<int>(d.size());
  double sum = 0.0;
  for (int i = 0; i < K; ++i) {
    sum += d[i];
    r.partial_sums.push_back(sum);
    if (i + 1 < K) r.ratios.push_back(d[i] == 0.0 ? 0.0 : d[i + 1] / d[i]);
  }
  for (std::size_t i = 1; i < r.ratios.size(); ++i) r.max_ratio_from_2 = std::max(r.max_ratio_from_2, r.ratios[i]);

  int j = K - 1;
  while (j > 0 && (d[j] < d[j - 1] || (d[j] == 0.0 && d[j - 1] == 0.0))) --j;
  r.k0 = j + 1;
  if (K == 1) {
    r.monotone_tail = d[0] == 0.0;
    if (!r.monotone_tail) r.diagnostic = "a single nonzero difference cannot show decay";
  } else {
    r.monotone_tail = r.k0 < K;
    if (!r.monotone_tail) {
      std::ostringstream os;
      os << "stalled: d_" << K << " = " << d[K - 1] << " is not below d_" << K - 1 << " = " << d[K - 2];
      r.diagnostic = os.str();
    }
  }
  return r;
}

BoundsReport verify_bounds(const RunResult& r) {
  const auto& setup = r.setup;
  const auto& cfg = setup.cfg;
  const auto& st = r.state;
  BoundsReport b;
  b.A = r.report.A;
  b.A_declared = cfg.A.has_value();
  const int N = st.v.nodes();
  for (int n = 0; n < N; ++n) b.sup_v2p = std::max(b.sup_v2p, sobolev_norm(st.v[n], 2, cfg.p));
  b.ball_pass = !b.A_declared || b.sup_v2p <= b.A;

  const double g0 = sobolev_norm(gradient(setup.rho0), 1, cfg.p);
  for (int n = 0; n < N; ++n) b.sup_grad_rho_1p = std::max(b.sup_grad_rho_1p, sobolev_norm(gradient(st.rho[n]), 1, cfg.p));
  b.grad_rho_bound = std::numbers::e * g0 * (1.0 + cfg.bound_slack);
  b.grad_rho_within = b.sup_grad_rho_1p <= b.grad_rho_bound;

  const double m = setup.rho0.values().minCoeff();
  const double M = setup.rho0.values().maxCoeff();
  b.max_principle = check_max_principle(st.rho, m, M, range_tolerance(m, M, setup.rho0.grid(), cfg.overshoot_factor));
  b.gradient_bound = check_gradient_bound(st.rho, st.advecting, setup.rho0, cfg.bound_slack, cfg.p);

  const VectorSeries phys = physical_velocity(r);
  for (int n = 0; n < N; ++n) {
    b.max_div = std::max(b.max_div, relative_divergence(st.v[n]));
    b.max_div = std::max(b.max_div, relative_divergence(phys[n]));
  }
  b.div_pass = b.max_div <= 1e-10;
  b.pass = b.ball_pass && b.max_principle.pass && b.gradient_bound.pass && b.div_pass;
  return b;
}

ResidualReport check_spde_residual(const RunResult& r) {
  const auto& st = r.state;
  const auto& noise = r.noise;
  const TimeGrid& time = noise.time;
  const int N = time.nodes();
  const double dt = time.dt();
  const bool additive = noise.regime == Regime::additive;

  // Nonlinear terms at each node.
  std::vector<VectorField> Nv(N);
  std::vector<ScalarField> Nr(N);
  std::vector<VectorField> f(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t nn = b; nn < e; ++nn) {
      const int n = static_cast<int>(nn);
      const VectorField& v = st.v[n];
      VectorField adv_field = v;
      adv_field.data() *= noise.z_inv[n];
      VectorField pressure(v.grid());
      for (int a = 0; a < v.dim(); ++a) pressure.col(a) = noise.z[n] * st.grad_pi[n].col(a) / st.rho[n].values();
      if (additive) {
        const VectorField& w = (*noise.wq)[n];
        f[n] = v - w;
        Nv[n] = advective_derivative(v, f[n]) + advective_derivative(v, w) + pressure;
      } else {
        f[n] = v;
        Nv[n] = advective_derivative(adv_field, v) + pressure;
      }
      Nr[n] = advective_derivative(adv_field, st.rho[n]);
    }
  });
  ResidualReport out;
  out.velocity.resize(N - 1);
  out.density.resize(N - 1);
  for (int n = 0; n + 1 < N; ++n) {
    const VectorField rv(f[n].grid(), (f[n + 1].data() - f[n].data()) / dt + 0.5 * (Nv[n].data() + Nv[n + 1].data()));
    const ScalarField rr(st.rho[n].grid(), (st.rho[n + 1].values() - st.rho[n].values()) / dt +
                                               0.5 * (Nr[n].values() + Nr[n + 1].values()));
    out.velocity[n] = l2_norm(rv);
    out.density[n] = l2_norm(rr);
  }
  out.velocity_sup = N > 1 ? out.velocity.maxCoeff() : 0.0;
  out.density_sup = N > 1 ? out.density.maxCoeff() : 0.0;
  return out;
}

UniquenessReport uniqueness_harness(const ProblemSetup& setup, Regime regime, const BrownianPath* path,
                                    const QWienerPath* qpath) {
  auto run_with = [&](InitialIterate init) {
    ProblemSetup s = setup;
    s.cfg.initial_iterate = init;
    switch (regime) {
      case Regime::multiplicative:
        if (!path) throw std::invalid_argument("multiplicative uniqueness harness needs a Brownian path");
        return run_multiplicative(s, *path);
      case Regime::additive:
        if (!qpath) throw std::invalid_argument("additive uniqueness harness needs a Q-Wiener path");
        return run_additive(s, *qpath);
      case Regime::deterministic:
        break;
    }
    return run_deterministic(s);
  };
  const RunResult a = run_with(InitialIterate::zero);
  const RunResult b = run_with(InitialIterate::projected);
  UniquenessReport u;
  u.both_converged = a.report.converged && b.report.converged;
  u.limit = 10.0 * setup.cfg.picard_tol;
  const VectorSeries va = physical_velocity(a);
  const VectorSeries vb = physical_velocity(b);
  if (!(va.time == vb.time)) throw ShapeMismatch("uniqueness runs ended on different time grids");
  for (int n = 0; n < va.nodes(); ++n) u.difference = std::max(u.difference, sobolev_norm(va[n] - vb[n], 1, setup.cfg.p));
  u.pass = u.both_converged && u.difference <= u.limit;
  return u;
}

}  // namespace steuler
