#include "steuler/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "steuler/field_io.hpp"

namespace steuler {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw std::invalid_argument(key + ": '" + v + "' is not a finite number");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw std::invalid_argument(key + ": '" + v + "' is not an integer");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw std::invalid_argument(key + ": value out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(key + ": '" + v + "' is not a boolean");
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DOUBLE_KEY(name) \
  {#name, {[](RunConfig& c, const std::string& v) { c.name = to_double(#name, v); }, [](const RunConfig& c) { return format_double(c.name); }}}
#define INT_KEY(name) \
  {#name, {[](RunConfig& c, const std::string& v) { c.name = to_int(#name, v); }, [](const RunConfig& c) { return std::to_string(c.name); }}}
#define STRING_KEY(name) \
  {#name, {[](RunConfig& c, const std::string& v) { c.name = v; }, [](const RunConfig& c) { return c.name; }}}

const std::vector<std::pair<std::string, Key>>& key_table() {
  static const std::vector<std::pair<std::string, Key>> table = {
      {"regime", {[](RunConfig& c, const std::string& v) { c.regime = parse_regime(v); },
                  [](const RunConfig& c) { return std::string(to_string(c.regime)); }}},
      INT_KEY(dim),
      INT_KEY(n_per_axis),
      DOUBLE_KEY(length),
      INT_KEY(n_steps),
      INT_KEY(noise_steps),
      DOUBLE_KEY(T_horizon),
      DOUBLE_KEY(p),
      DOUBLE_KEY(picard_tol),
      INT_KEY(k_max),
      {"A", {[](RunConfig& c, const std::string& v) {
               if (v.empty() || v == "auto") c.A.reset();
               else c.A = to_double("A", v);
             },
             [](const RunConfig& c) { return c.A ? format_double(*c.A) : std::string("auto"); }}},
      {"use_stopping_time", {[](RunConfig& c, const std::string& v) { c.use_stopping_time = to_bool("use_stopping_time", v); },
                             [](const RunConfig& c) { return std::string(c.use_stopping_time ? "true" : "false"); }}},
      {"seed", {[](RunConfig& c, const std::string& v) {
                  errno = 0;
                  char* end = nullptr;
                  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
                  if (v.empty() || v[0] == '-' || *end != '\0' || errno == ERANGE)
                    throw std::invalid_argument("seed: '" + v + "' is not a non-negative 64-bit integer");
                  c.seed = x;
                },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      INT_KEY(q_modes),
      DOUBLE_KEY(q_decay),
      DOUBLE_KEY(q_smoothness),
      DOUBLE_KEY(q_lambda_scale),
      DOUBLE_KEY(elliptic_rel_tol),
      INT_KEY(elliptic_max_iter),
      STRING_KEY(initial_condition),
      STRING_KEY(ic_path),
      STRING_KEY(initial_iterate),
      DOUBLE_KEY(rho_min),
      DOUBLE_KEY(rho_max),
      DOUBLE_KEY(velocity_amplitude),
      DOUBLE_KEY(blob_x),
      DOUBLE_KEY(blob_y),
      DOUBLE_KEY(blob_z),
      DOUBLE_KEY(blob_width),
      INT_KEY(substeps),
      STRING_KEY(transport_interp),
      INT_KEY(taylor_order),
      DOUBLE_KEY(max_step_cells),
      DOUBLE_KEY(div_tol),
      DOUBLE_KEY(overshoot_factor),
      DOUBLE_KEY(bound_slack),
      DOUBLE_KEY(c1),
      DOUBLE_KEY(c2),
      DOUBLE_KEY(c3),
  };
  return table;
}

#undef DOUBLE_KEY
#undef INT_KEY
#undef STRING_KEY

const Key& find_key(const std::string& key) {
  for (const auto& [name, k] : key_table())
    if (name == key) return k;
  throw std::invalid_argument("unknown key '" + key + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& kv : key_table()) out.push_back(kv.first);
  return out;
}

std::string config_value(const RunConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  apply_overrides(cfg, {{key, value}});
}

void apply_overrides(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv) {
  try {
    for (const auto& [key, value] : kv) find_key(key).set(cfg, value);
    validate(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), 0);
  }
}

void validate(RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m, 0); };
  c.warnings.clear();
  try {
    validate(GridSpec(c.dim, c.n_per_axis, c.length));
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (c.n_steps < 1) fail("n_steps must be >= 1");
  if (c.noise_steps < 0) fail("noise_steps must be >= 0 (0 means n_steps)");
  if (!(c.T_horizon > 0.0)) fail("T_horizon must be positive");
  if (!(c.p > 1.0)) fail("p must exceed 1");
  if (c.p <= 3.0) c.warnings.push_back("p = " + format_double(c.p) + " is outside 3 < p < inf required by the existence theorem");
  if (!(c.picard_tol > 0.0)) fail("picard_tol must be positive");
  if (c.k_max < 1) fail("k_max must be >= 1");
  if (c.A && !(*c.A > 1.0)) fail("A must exceed 1");
  if (c.q_modes < 1) fail("q_modes must be >= 1");
  if (!(c.q_decay > 0.0)) fail("q_decay must be positive");
  if (c.q_decay <= 1.0) c.warnings.push_back("q_decay <= 1: the eigenvalue sequence is not summable as M grows");
  if (c.q_smoothness <= 2.5) c.warnings.push_back("q_smoothness <= 5/2 is below the regularity hypothesis");
  if (!(c.q_lambda_scale > 0.0)) fail("q_lambda_scale must be positive");
  if (c.regime == Regime::additive) {
    const GridSpec g(c.dim, c.n_per_axis, c.length);
    if (c.q_modes > mode_budget(g))
      fail("q_modes " + std::to_string(c.q_modes) + " exceeds the dealiased mode budget " + std::to_string(mode_budget(g)));
  }
  if (!(c.elliptic_rel_tol > 0.0 && c.elliptic_rel_tol < 1.0)) fail("elliptic_rel_tol must be in (0, 1)");
  if (c.elliptic_max_iter < 1) fail("elliptic_max_iter must be >= 1");
  if (c.initial_condition != "taylor_green" && c.initial_condition != "gaussian_density_blob" &&
      c.initial_condition != "from_file")
    fail("initial_condition must be taylor_green, gaussian_density_blob or from_file");
  if (c.initial_condition == "from_file" && c.ic_path.empty()) fail("initial_condition=from_file needs ic_path");
  if (c.initial_iterate != "zero" && c.initial_iterate != "projected") fail("initial_iterate must be zero or projected");
  if (!(c.rho_min > 0.0)) fail("rho_min (m) must be positive");
  if (c.rho_max < c.rho_min) fail("rho_max must be >= rho_min");
  if (!(c.blob_width > 0.0)) fail("blob_width must be positive");
  if (c.substeps < 1) fail("substeps must be >= 1");
  if (c.transport_interp != "taylor" && c.transport_interp != "cubic_spline")
    fail("transport_interp must be taylor or cubic_spline");
  if (c.taylor_order < 1 || c.taylor_order > 8) fail("taylor_order must be in [1, 8]");
  if (!(c.max_step_cells > 0.0)) fail("max_step_cells must be positive");
  if (!(c.div_tol > 0.0)) fail("div_tol must be positive");
  if (!(c.overshoot_factor >= 0.0)) fail("overshoot_factor must be >= 0");
  if (!(c.bound_slack >= 0.0)) fail("bound_slack must be >= 0");
  if (!(c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0)) fail("c1, c2, c3 must be positive");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key=value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' already set on line " +
                            std::to_string(it->second),
                        line_no);
    seen[key] = line_no;
    try {
      find_key(key).set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    for (const auto& [key, ln] : seen)
      if (std::string(e.what()).rfind(key + " ", 0) == 0)
        throw ConfigError("line " + std::to_string(ln) + ": " + e.what(), ln);
    throw;
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config(os.str());
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, k] : key_table()) out += name + " = " + k.get(cfg) + "\n";
  return out;
}

GridSpec grid_of(const RunConfig& cfg) { return GridSpec(cfg.dim, cfg.n_per_axis, cfg.length); }

QWienerSpec q_spec_of(const RunConfig& cfg) {
  QWienerSpec s;
  s.mode_count = cfg.q_modes;
  s.decay_exponent = cfg.q_decay;
  s.smoothness_k = cfg.q_smoothness;
  s.lambda_scale = cfg.q_lambda_scale;
  return s;
}

int effective_noise_steps(const RunConfig& cfg) { return cfg.noise_steps > 0 ? cfg.noise_steps : cfg.n_steps; }

ProblemSetup setup_of(const RunConfig& cfg) {
  const GridSpec grid = grid_of(cfg);
  ProblemSetup s;
  s.t_horizon = cfg.T_horizon;
  s.n_steps = cfg.n_steps;
  const double amp = cfg.velocity_amplitude;
  auto taylor_green = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d {
    const double cz = grid.dim == 3 ? std::cos(x[2]) : 1.0;
    return {amp * std::sin(x[0]) * std::cos(x[1]) * cz, -amp * std::cos(x[0]) * std::sin(x[1]) * cz, 0.0};
  };
  if (cfg.initial_condition == "from_file") {
    const std::filesystem::path dir(cfg.ic_path);
    const StoredField rho = read_field(dir / "rho0");
    const StoredField v = read_field(dir / "v0");
    if (!(rho.grid == grid) || !(v.grid == grid)) throw std::invalid_argument("initial data grid does not match config");
    s.rho0 = rho.scalar();
    s.v0 = v.vector();
  } else {
    s.v0 = VectorField::from_function(grid, taylor_green);
    if (cfg.initial_condition == "taylor_green") {
      s.rho0 = ScalarField::constant(grid, cfg.rho_min);
    } else {
      const Eigen::Vector3d c(cfg.blob_x, cfg.blob_y, cfg.blob_z);
      const double k0 = 2.0 * std::numbers::pi / grid.length;
      const double w2 = cfg.blob_width * cfg.blob_width * k0 * k0;
      // Periodic bump exp(sum_a (cos(k0 (x_a - c_a)) - 1) / (k0 w)^2), Gaussian near the centre.
      s.rho0 = ScalarField::from_function(grid, [&](const Eigen::Vector3d& x) {
        double e = 0.0;
        for (int a = 0; a < grid.dim; ++a) e += (std::cos(k0 * (x[a] - c[a])) - 1.0) / w2;
        return cfg.rho_min + (cfg.rho_max - cfg.rho_min) * std::exp(e);
      });
    }
  }
  auto& pc = s.cfg;
  pc.p = cfg.p;
  pc.picard_tol = cfg.picard_tol;
  pc.k_max = cfg.k_max;
  pc.elliptic.rel_tol = cfg.elliptic_rel_tol;
  pc.elliptic.max_iter = cfg.elliptic_max_iter;
  pc.transport.substeps = cfg.substeps;
  pc.transport.interp = cfg.transport_interp == "taylor" ? FootInterpolation::taylor : FootInterpolation::cubic_spline;
  pc.transport.taylor_order = cfg.taylor_order;
  pc.transport.max_step_cells = cfg.max_step_cells;
  pc.transport.div_tol = cfg.div_tol;
  pc.overshoot_factor = cfg.overshoot_factor;
  pc.bound_slack = cfg.bound_slack;
  pc.initial_iterate = cfg.initial_iterate == "zero" ? InitialIterate::zero : InitialIterate::projected;
  pc.A = cfg.A;
  pc.use_stopping_time = cfg.use_stopping_time;
  pc.c1 = cfg.c1;
  pc.c2 = cfg.c2;
  pc.c3 = cfg.c3;
  return s;
}

}  // namespace steuler
