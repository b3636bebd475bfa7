#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "slq/errors.hpp"
#include "slq/problem.hpp"
#include "slq/sdesim.hpp"

namespace slq::cli {

/// Malformed config file: bad syntax, unknown or missing key, wrong type.
class ConfigParseError : public Error {
 public:
  using Error::Error;
};

enum class Mode { Oracle, DataDriven, Both, Validate };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

struct SolverConfig {
  double eps_oracle = 1e-10;
  double eps_dd = 1e-3;
  int max_iter = 100;
  double rank_tol = 1e-8;
};

struct RunConfig {
  ProblemSpec problem;
  SimConfig sim;
  SolverConfig solver;
  Mode mode = Mode::Both;
  std::filesystem::path out_dir = "slq_out";
  bool dump_trajectories = false;

  /// Config path, or "bundled:<name>".
  std::string source;
  /// Where each tunable came from: "flag", "config" or "default".
  std::map<std::string, std::string> provenance;
};

/// Command-line values; each one set here beats the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<double> noise_std;
  std::optional<double> eps;  // data-driven stopping threshold
  std::optional<Mode> mode;
  std::optional<std::filesystem::path> out_dir;
  bool dump_trajectories = false;
};

/// Config text of a bundled scenario ("oscillator"), if it exists.
std::optional<std::string_view> bundled_config(std::string_view name);

/// Parses and fully validates config text: shapes, cost definiteness,
/// stabilizing K0 and the sampling grid. Throws ConfigParseError or
/// ValidationError / DimensionError.
RunConfig parse_config(std::string_view text, const Overrides& overrides = {},
                       std::string source = "<string>");

/// Reads `path_or_name` from disk, falling back to a bundled scenario of
/// that name.
RunConfig load_config(const std::string& path_or_name,
                      const Overrides& overrides = {});

}  // namespace slq::cli
