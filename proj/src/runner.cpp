#include "steuler/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "steuler/field_io.hpp"
#include "steuler/norms.hpp"
#include "steuler/spectral.hpp"

namespace steuler {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "steuler-run/1";

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json array_json(const Eigen::ArrayXd& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(number(a[i]));
  return out;
}

struct Paths {
  std::optional<BrownianPath> brownian;
  std::optional<QWienerPath> q;
};

Paths sample_paths(const RunConfig& cfg) {
  Paths p;
  const int steps = effective_noise_steps(cfg);
  if (cfg.regime == Regime::multiplicative) p.brownian = sample_brownian(cfg.T_horizon, steps, cfg.seed);
  if (cfg.regime == Regime::additive) p.q = sample_q_wiener(grid_of(cfg), q_spec_of(cfg), cfg.T_horizon, steps, cfg.seed);
  return p;
}

std::vector<std::pair<std::string, const VectorSeries*>> vector_outputs(const RunResult& r, const VectorSeries& phys) {
  std::vector<std::pair<std::string, const VectorSeries*>> out{{"v", &phys}};
  if (r.noise.regime == Regime::multiplicative) out.push_back({"v_tilde", &r.state.v});
  out.push_back({"u", &r.state.u});
  out.push_back({"grad_pi", &r.state.grad_pi});
  out.push_back({"advecting", &r.state.advecting});
  return out;
}

json bounds_json(const BoundsReport& b) {
  const auto& mp = b.max_principle;
  const auto& gb = b.gradient_bound;
  return {{"pass", b.pass},
          {"ball", {{"A", b.A}, {"declared", b.A_declared}, {"sup_v_2p", b.sup_v2p}, {"pass", b.ball_pass}}},
          {"grad_rho_1p",
           {{"sup", b.sup_grad_rho_1p}, {"bound", b.grad_rho_bound}, {"within", b.grad_rho_within}, {"asserted", false}}},
          {"max_principle",
           {{"m", mp.m},
            {"M", mp.M},
            {"range_tol", mp.range_tol},
            {"worst_violation", mp.worst_violation},
            {"pass", mp.pass},
            {"node", mp.node},
            {"point", mp.point},
            {"location", {mp.location[0], mp.location[1], mp.location[2]}},
            {"value", mp.value}}},
          {"gradient_bound",
           {{"pass", gb.pass}, {"worst_ratio", number(gb.worst_ratio)}, {"lhs", array_json(gb.lhs)},
            {"rhs", array_json(gb.rhs)}, {"growth_exponent", array_json(gb.growth_exponent)}}},
          {"divergence", {{"max_relative", b.max_div}, {"limit", 1e-10}, {"pass", b.div_pass}}}};
}

json residual_json(const ResidualReport& r) {
  return {{"velocity_sup", r.velocity_sup},
          {"density_sup", r.density_sup},
          {"velocity", array_json(r.velocity)},
          {"density", array_json(r.density)}};
}

}  // namespace

std::string field_stem(const std::string& name, int node) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%04d", node);
  return name + buf;
}

RunResult solve(const RunConfig& cfg) {
  const ProblemSetup setup = setup_of(cfg);
  const Paths paths = sample_paths(cfg);
  switch (cfg.regime) {
    case Regime::multiplicative: return run_multiplicative(setup, *paths.brownian);
    case Regime::additive: return run_additive(setup, *paths.q);
    case Regime::deterministic: break;
  }
  return run_deterministic(setup);
}

std::string norms_csv(const RunResult& r, double p) {
  const VectorSeries v = physical_velocity(r);
  const int N = v.nodes();
  std::string out = "node,t,v_0p,v_1p,v_2p,grad_rho_1p,rho_min,rho_max,div_v_inf\n";
  for (int n = 0; n < N; ++n) {
    const auto& rho = r.state.rho[n];
    out += std::to_string(n) + "," + g17(v.time.t(n)) + "," + g17(sobolev_norm(v[n], 0, p)) + "," +
           g17(sobolev_norm(v[n], 1, p)) + "," + g17(sobolev_norm(v[n], 2, p)) + "," +
           g17(sobolev_norm(gradient(rho), 1, p)) + "," + g17(rho.values().minCoeff()) + "," +
           g17(rho.values().maxCoeff()) + "," + g17(sup_norm(divergence(v[n]))) + "\n";
  }
  out += "\n# picard history\nk,d_k,ratio,partial_sum,sigma,grad_q\n";
  std::vector<double> d;
  for (const auto& h : r.report.history) d.push_back(h.d);
  const ConvergenceReport c = monitor_convergence(d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& h = r.report.history[i];
    out += std::to_string(h.k) + "," + g17(h.d) + "," + (i == 0 ? std::string("") : g17(c.ratios[i - 1])) + "," +
           g17(c.partial_sums[i]) + "," + g17(h.sigma) + "," + g17(h.grad_q) + "\n";
  }
  return out;
}

json run_report(const RunConfig& cfg, const RunResult& r) {
  json config = json::object();
  for (const auto& k : config_keys()) config[k] = config_value(cfg, k);
  const auto& rep = r.report;
  json history = json::array();
  for (const auto& h : rep.history)
    history.push_back({{"k", h.k},
                       {"d", h.d},
                       {"sigma", h.sigma},
                       {"grad_q", h.grad_q},
                       {"L5", number(h.L5)},
                       {"L6", number(h.L6)},
                       {"K", number(h.K)},
                       {"max_cg_iterations", h.max_cg_iterations},
                       {"sup_v_2p", h.sup_v2p},
                       {"seconds", h.seconds}});
  std::vector<double> d;
  for (const auto& h : rep.history) d.push_back(h.d);
  const ConvergenceReport c = monitor_convergence(d);

  json noise = {{"kind", cfg.regime == Regime::multiplicative ? "brownian"
                         : cfg.regime == Regime::additive     ? "q_wiener"
                                                              : "none"},
                {"seed", cfg.seed},
                {"noise_steps", effective_noise_steps(cfg)},
                {"t_end", cfg.T_horizon}};
  if (cfg.regime == Regime::additive)
    noise["q"] = {{"M", cfg.q_modes}, {"s", cfg.q_decay}, {"k", cfg.q_smoothness}, {"lambda_scale", cfg.q_lambda_scale}};

  json out = {
      {"format", kFormat},
      {"domain", "periodic torus [0, length)^dim; the whole-space problem is replaced by its periodic analogue"},
      {"config", config},
      {"config_text", to_text(cfg)},
      {"warnings", cfg.warnings},
      {"noise", noise},
      {"stopping_time",
       {{"tau", rep.stopping.tau},
        {"capped", rep.stopping.capped},
        {"A", rep.A},
        {"A_declared", cfg.A.has_value()},
        {"used_as_horizon", cfg.use_stopping_time},
        {"ball_untested_beyond_tau", !cfg.use_stopping_time && rep.stopping.tau < cfg.T_horizon}}},
      {"t_run", rep.t_run},
      {"n_steps", r.state.v.time.n_steps},
      {"grid", {{"dim", cfg.dim}, {"n_per_axis", cfg.n_per_axis}, {"length", cfg.length}}},
      {"solve",
       {{"regime", to_string(rep.regime)},
        {"converged", rep.converged},
        {"iterations", rep.iterations},
        {"final_diff", rep.final_diff},
        {"picard_tol", cfg.picard_tol},
        {"v0_projected", rep.v0_projected},
        {"notes", rep.notes},
        {"history", history},
        {"timing",
         {{"transport", rep.timing.transport},
          {"pressure", rep.timing.pressure},
          {"forcing", rep.timing.forcing},
          {"projection", rep.timing.projection},
          {"norms", rep.timing.norms},
          {"total", rep.timing.total}}}}},
      {"convergence",
       {{"d", c.d},
        {"ratios", c.ratios},
        {"partial_sums", c.partial_sums},
        {"k0", c.k0},
        {"monotone_tail", c.monotone_tail},
        {"max_ratio_from_2", c.max_ratio_from_2},
        {"diagnostic", c.diagnostic}}},
  };
  if (rep.converged) {
    out["bounds"] = bounds_json(verify_bounds(r));
    out["residuals"] = residual_json(check_spde_residual(r));
  }
  return out;
}

int run(const RunConfig& cfg, const fs::path& out_dir, std::ostream& err) {
  try {
    for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
    fs::create_directories(out_dir / "fields");
    const Paths paths = sample_paths(cfg);
    if (paths.brownian) write_path(out_dir / "noise", *paths.brownian);
    if (paths.q) write_path(out_dir / "noise", *paths.q);
    const RunResult r = solve(cfg);

    const VectorSeries phys = physical_velocity(r);
    const int N = phys.nodes();
    for (int n = 0; n < N; ++n) {
      const json extra = {{"time", phys.time.t(n)}, {"regime", to_string(cfg.regime)}};
      json h = extra;
      h["name"] = "rho";
      write_field(out_dir / "fields" / field_stem("rho", n), r.state.rho[n], n, h);
      for (const auto& [name, series] : vector_outputs(r, phys)) {
        h["name"] = name;
        write_field(out_dir / "fields" / field_stem(name, n), (*series)[n], n, h);
      }
    }
    {
      std::ofstream os(out_dir / "norms.csv", std::ios::trunc);
      os << norms_csv(r, cfg.p);
    }
    const json report = run_report(cfg, r);
    write_json(out_dir / "run.json", report);
    if (!r.report.converged) {
      err << "error: Picard iteration did not converge in " << r.report.iterations << " iterations (final d_k "
          << r.report.final_diff << ", tolerance " << cfg.picard_tol << ")\n";
      return 2;
    }
    if (!report["bounds"]["pass"].get<bool>()) err << "warning: bound verification failed, see run.json\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}


namespace {

ScalarSeries load_scalar_series(const fs::path& dir, const std::string& name, const TimeGrid& time) {
  ScalarSeries s;
  s.time = time;
  for (int n = 0; n < time.nodes(); ++n) s.frames.push_back(read_field(dir / "fields" / field_stem(name, n)).scalar());
  return s;
}

VectorSeries load_vector_series(const fs::path& dir, const std::string& name, const TimeGrid& time) {
  VectorSeries s;
  s.time = time;
  for (int n = 0; n < time.nodes(); ++n) s.frames.push_back(read_field(dir / "fields" / field_stem(name, n)).vector());
  return s;
}

TimeGrid run_time_of(const json& report) {
  return TimeGrid{report.at("t_run").get<double>(), report.at("n_steps").get<int>()};
}

}  // namespace

VerifyOutcome verify_run(const fs::path& dir) {
  const json stored = read_json(dir / "run.json");
  if (stored.value("format", "") != kFormat) throw std::runtime_error(dir.string() + ": not a run report");
  const RunConfig cfg = parse_config(stored.at("config_text").get<std::string>());
  const TimeGrid time = run_time_of(stored);

  RunResult r;
  r.setup = setup_of(cfg);
  r.report.regime = cfg.regime;
  r.report.A = stored.at("stopping_time").at("A").get<double>();
  r.report.converged = stored.at("solve").at("converged").get<bool>();
  std::optional<BrownianPath> bp;
  std::optional<QWienerPath> qp;
  if (cfg.regime == Regime::multiplicative) bp = read_brownian(dir / "noise");
  if (cfg.regime == Regime::additive) qp = read_q_wiener(dir / "noise");
  r.noise = make_noise_context(cfg.regime, time, bp ? &*bp : nullptr, qp ? &*qp : nullptr);

  r.state.rho = load_scalar_series(dir, "rho", time);
  r.setup.rho0 = r.state.rho[0];
  r.state.v = load_vector_series(dir, cfg.regime == Regime::multiplicative ? "v_tilde" : "v", time);
  r.state.u = load_vector_series(dir, "u", time);
  r.state.grad_pi = load_vector_series(dir, "grad_pi", time);
  r.state.advecting = load_vector_series(dir, "advecting", time);

  const BoundsReport b = verify_bounds(r);
  const ResidualReport res = check_spde_residual(r);
  VerifyOutcome out;
  out.summary = {{"converged", r.report.converged}, {"bounds", bounds_json(b)}, {"residuals", residual_json(res)}};
  bool match = true;
  if (stored.contains("residuals")) {
    const double a = stored["residuals"]["velocity_sup"].get<double>();
    const double c = stored["residuals"]["density_sup"].get<double>();
    match = std::abs(a - res.velocity_sup) <= 1e-12 * (1.0 + std::abs(a)) &&
            std::abs(c - res.density_sup) <= 1e-12 * (1.0 + std::abs(c));
  }
  out.summary["matches_stored_report"] = match;
  out.pass = r.report.converged && b.pass && match;
  out.summary["pass"] = out.pass;
  return out;
}

json compare_runs(const fs::path& a, const fs::path& b) {
  const json ra = read_json(a / "run.json");
  const json rb = read_json(b / "run.json");
  if (ra.at("grid") != rb.at("grid")) throw ShapeMismatch("runs use different spatial grids");
  const TimeGrid ta = run_time_of(ra);
  const TimeGrid tb = run_time_of(rb);
  if (!(ta == tb)) throw ShapeMismatch("runs use different time grids");
  const double p = std::stod(ra.at("config").at("p").get<std::string>());
  json out = json::object();
  auto record = [&](const std::string& name, double l2, double w1p) {
    out[name] = {{"l2", l2}, {"w1p", w1p}};
  };
  {
    double l2 = 0.0, w = 0.0;
    for (int n = 0; n < ta.nodes(); ++n) {
      const ScalarField fa = read_field(a / "fields" / field_stem("rho", n)).scalar();
      const ScalarField fb = read_field(b / "fields" / field_stem("rho", n)).scalar();
      const ScalarField diff = fa - fb;
      l2 = std::max(l2, l2_norm(diff));
      w = std::max(w, sobolev_norm(diff, 1, p));
    }
    record("rho", l2, w);
  }
  for (const std::string name : {"v", "u", "grad_pi"}) {
    double l2 = 0.0, w = 0.0;
    for (int n = 0; n < ta.nodes(); ++n) {
      const VectorField fa = read_field(a / "fields" / field_stem(name, n)).vector();
      const VectorField fb = read_field(b / "fields" / field_stem(name, n)).vector();
      if (!(fa.grid() == fb.grid()) || fa.dim() != fb.dim()) throw ShapeMismatch("field " + name + " shapes differ");
      const VectorField diff = fa - fb;
      l2 = std::max(l2, l2_norm(diff));
      w = std::max(w, sobolev_norm(diff, 1, p));
    }
    record(name, l2, w);
  }
  return out;
}

}  // namespace steuler
