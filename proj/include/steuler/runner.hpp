#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "steuler/config.hpp"
#include "steuler/picard.hpp"

namespace steuler {

/// Solves the configured problem. Noise is sampled from cfg.seed.
RunResult solve(const RunConfig& cfg);

/// Per-node norm table plus the d_k appendix, 17 significant digits.
std::string norms_csv(const RunResult& r, double p);

/// run.json content for a finished run.
nlohmann::json run_report(const RunConfig& cfg, const RunResult& r);

/// Writes run.json, norms.csv, noise.{bin,json} and fields/<name>_<nnnn>.{bin,json}.
/// Returns 0 when converged, 2 on Picard non-convergence, 1 on any error
/// (diagnostics go to err).
int run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& err);

/// Re-runs bound and residual checks on stored fields.
struct VerifyOutcome {
  bool pass = false;
  nlohmann::json summary;
};
VerifyOutcome verify_run(const std::filesystem::path& dir);

/// Sup-over-nodes L2 and W^{1,p} differences per stored field. Throws
/// ShapeMismatch when grids or time grids differ.
nlohmann::json compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);

std::string field_stem(const std::string& name, int node);

}  // namespace steuler
