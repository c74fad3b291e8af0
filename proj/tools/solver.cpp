// Command-line front end: run, verify and compare.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steuler/config.hpp"
#include "steuler/runner.hpp"

namespace {

// Remaining "--key value" / "--key=value" arguments become config overrides.
std::vector<std::pair<std::string, std::string>> parse_extras(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0) throw steuler::ConfigError("unexpected argument '" + arg + "'", 0);
    arg = arg.substr(2);
    std::string key, value;
    if (const auto eq = arg.find('='); eq != std::string::npos) {
      key = arg.substr(0, eq);
      value = arg.substr(eq + 1);
    } else {
      if (i + 1 >= extras.size()) throw steuler::ConfigError("missing value for --" + arg, 0);
      key = arg;
      value = extras[++i];
    }
    out.emplace_back(key, value);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Picard solver for the stochastic inhomogeneous Euler equations on a periodic torus"};
  app.require_subcommand(1);

  std::string config_path, out_dir, regime;
  long long seed = -1;
  auto* run = app.add_subcommand("run", "solve a configured problem and write a report directory");
  run->add_option("--config", config_path, "key=value config file (defaults apply when omitted)");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "noise seed (overrides the config)");
  run->add_option("--regime", regime, "multiplicative, additive or deterministic");
  run->allow_extras();

  std::string report_dir;
  auto* verify = app.add_subcommand("verify", "re-run bound and residual checks on a stored run");
  verify->add_option("--report", report_dir, "run directory")->required();

  std::string dir_a, dir_b;
  auto* compare = app.add_subcommand("compare", "field differences between two runs");
  compare->add_option("A", dir_a, "first run directory")->required();
  compare->add_option("B", dir_b, "second run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      steuler::RunConfig cfg = config_path.empty() ? steuler::parse_config("") : steuler::load_config(config_path);
      auto overrides = parse_extras(run->remaining());
      if (seed >= 0) overrides.emplace_back("seed", std::to_string(seed));
      if (!regime.empty()) overrides.emplace_back("regime", regime);
      steuler::apply_overrides(cfg, overrides);
      return steuler::run(cfg, out_dir, std::cerr);
    }
    if (*verify) {
      const auto outcome = steuler::verify_run(report_dir);
      std::cout << outcome.summary.dump(2) << '\n';
      return outcome.pass ? 0 : 1;
    }
    if (*compare) {
      std::cout << steuler::compare_runs(dir_a, dir_b).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
