#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steuler/picard.hpp"

namespace steuler {

/// Flat key=value run description. Every key has a default; see README.
struct RunConfig {
  Regime regime = Regime::deterministic;
  int dim = 2;
  int n_per_axis = 64;
  double length = 2.0 * std::numbers::pi;
  int n_steps = 64;
  int noise_steps = 0;  // 0: same as n_steps
  double T_horizon = 0.1;
  double p = 4.0;
  double picard_tol = 1e-8;
  int k_max = 30;
  std::optional<double> A;
  bool use_stopping_time = true;
  std::uint64_t seed = 0;
  int q_modes = 8;
  double q_decay = 4.0;
  double q_smoothness = 3.0;
  double q_lambda_scale = 1.0;
  double elliptic_rel_tol = 1e-10;
  int elliptic_max_iter = 500;
  std::string initial_condition = "taylor_green";
  std::string ic_path;
  std::string initial_iterate = "zero";
  double rho_min = 1.0;
  double rho_max = 2.0;
  double velocity_amplitude = 1.0;
  double blob_x = std::numbers::pi;
  double blob_y = std::numbers::pi;
  double blob_z = std::numbers::pi;
  double blob_width = 0.5;
  int substeps = 2;
  std::string transport_interp = "taylor";
  int taylor_order = 4;
  double max_step_cells = 0.25;
  double div_tol = 1e-8;
  double overshoot_factor = 1.0;
  double bound_slack = 0.05;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;

  std::vector<std::string> warnings;

  bool operator==(const RunConfig&) const = default;
};

/// Thrown for malformed text or invalid values; line is 0 for overrides.
struct ConfigError : std::invalid_argument {
  ConfigError(const std::string& what, int line_no) : std::invalid_argument(what), line(line_no) {}
  int line;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Sets one key from its text value, as a config line would.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
/// Sets several keys, validating once at the end.
void apply_overrides(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv);
/// Checks invariants and refreshes warnings.
void validate(RunConfig& cfg);
/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& cfg);
std::vector<std::string> config_keys();
std::string config_value(const RunConfig& cfg, const std::string& key);

GridSpec grid_of(const RunConfig& cfg);
QWienerSpec q_spec_of(const RunConfig& cfg);
ProblemSetup setup_of(const RunConfig& cfg);
int effective_noise_steps(const RunConfig& cfg);

}  // namespace steuler
