#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "slq/cli/config.hpp"
#include "slq/datadriven.hpp"
#include "slq/oracle.hpp"

namespace slq::cli {

/// Process exit codes; the only machine-readable failure channel.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitRankDeficient = 3,
  kExitNotConverged = 4,
  kExitNumerical = 5,
};

/// Maps the active exception to an exit code. Call inside a catch block.
int exit_code_for_current_exception();

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::optional<OracleReport> oracle;
  std::optional<DDReport> datadriven;
  std::optional<RankCheck> rank;
  std::string manifest_json;
};

/// Executes the configured mode and writes history.csv, final.csv and
/// manifest.json (plus trajectories.csv when requested) into cfg.out_dir.
/// Never throws for solver failures; they are reported through exit_code.
RunResult run(const RunConfig& cfg, std::ostream& log);

}  // namespace slq::cli
