#pragma once

// Strict JSON run configuration. Unknown keys and out-of-range values raise
// ConfigError before any computation starts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfpk/drift.hpp"
#include "gfpk/galerkin_ladder.hpp"
#include "gfpk/nonlinear_fpk.hpp"
#include "gfpk/oracles.hpp"

namespace gfpk {

enum class Mode { SolveLinear, SolveNonlinear, Ladder, Sweep, Verify, OracleCompare };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

struct SeedSpec {
  std::vector<double> cameron_martin;  // empty: rho = 1
};

struct SweepSpec {
  std::string parameter;  // numeric key of the drift block
  std::vector<double> values;
};

struct OracleSpec {
  double L = 10.0;
  int points = 20001;
  int vlasov_points = 1001;  // self-consistent oracle grid (quadratic cost)
  double tolerance = 1e-6;
  double fd_L = 6.0;
  int fd_n = 200;
  double fd_tolerance = 5e-3;
  SdeOptions sde;
};

struct RunConfig {
  Mode mode = Mode::SolveLinear;
  int k = 1;
  int N = 8;
  int Q = 16;
  nlohmann::json drift;  // validated drift block
  FixedPointOptions fixed_point;
  SeedSpec seed_density;
  std::optional<LadderConfig> ladder;
  std::optional<SweepSpec> sweep;
  std::string verify_input;
  OracleSpec oracle;
  std::vector<double> t_grid{2.0, 4.0, 8.0};
  double log_moment_alpha = 0.2;
  std::string output_dir = "gfpk_out";
  std::uint64_t seed = 0;
  int threads = 0;  // 0: not configured
  nlohmann::json source;  // the document as parsed
};

/// Parses a configuration document. The mode comes from the command line and
/// must agree with the document's "mode" key when present.
RunConfig parse_config(const nlohmann::json& doc, std::optional<Mode> mode = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<Mode> mode = std::nullopt);

/// Builds a drift from a validated drift block (see README for the schema).
DriftField build_drift(const nlohmann::json& block, int k);

/// FNV-1a 64-bit hash of the canonical dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

}  // namespace gfpk
