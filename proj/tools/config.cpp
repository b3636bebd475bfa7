#include "slq/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "slq/cli/bundled_configs.hpp"

namespace slq::cli {

namespace {

const std::set<std::string> kKnownKeys = {
    "A", "B", "C", "D", "Q", "S", "R", "x0", "K0",
    "horizon", "sample_interval", "step", "paths", "noise_std", "seed",
    "eps_oracle", "eps_dd", "max_iter", "rank_tol", "mode", "out"};

Matrix read_matrix(const YAML::Node& root, const char* key) {
  const YAML::Node node = root[key];
  if (!node) throw ConfigParseError(std::string("missing key '") + key + "'");
  if (!node.IsSequence() || node.size() == 0) {
    throw ConfigParseError(std::string("'") + key +
                           "' must be a non-empty list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const YAML::Node row = node[static_cast<std::size_t>(i)];
    if (!row.IsSequence() || row.size() == 0) {
      throw ConfigParseError(std::string("'") + key + "' row " +
                             std::to_string(i + 1) + " is not a list");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigParseError(std::string("'") + key + "' has ragged rows");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      try {
        m(i, j) = row[static_cast<std::size_t>(j)].as<double>();
      } catch (const YAML::Exception&) {
        throw ConfigParseError(std::string("'") + key + "' entry (" +
                               std::to_string(i + 1) + "," +
                               std::to_string(j + 1) + ") is not a number");
      }
    }
  }
  return m;
}

Vector read_vector(const YAML::Node& root, const char* key) {
  const YAML::Node node = root[key];
  if (!node) throw ConfigParseError(std::string("missing key '") + key + "'");
  if (!node.IsSequence() || node.size() == 0) {
    throw ConfigParseError(std::string("'") + key + "' must be a flat list");
  }
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    try {
      v(static_cast<Eigen::Index>(i)) = node[i].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigParseError(std::string("'") + key + "' entry " +
                             std::to_string(i + 1) + " is not a number");
    }
  }
  return v;
}

// Resolves flag > config > default and records which one won.
template <class T>
T resolve(const YAML::Node& root, const char* key, const std::optional<T>& flag,
          T fallback, std::map<std::string, std::string>& provenance) {
  if (flag) {
    provenance[key] = "flag";
    return *flag;
  }
  if (const YAML::Node node = root[key]) {
    provenance[key] = "config";
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigParseError(std::string("'") + key + "' has the wrong type");
    }
  }
  provenance[key] = "default";
  return fallback;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Oracle: return "oracle";
    case Mode::DataDriven: return "datadriven";
    case Mode::Both: return "both";
    case Mode::Validate: return "validate";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) {
  for (Mode m : {Mode::Oracle, Mode::DataDriven, Mode::Both, Mode::Validate}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<std::string_view> bundled_config(std::string_view name) {
  if (name == "oscillator") return bundled::kOscillator;
  return std::nullopt;
}

RunConfig parse_config(std::string_view text, const Overrides& overrides,
                       std::string source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigParseError("config is not valid YAML: " + std::string(e.what()));
  }
  if (!root.IsMap()) throw ConfigParseError("config must be a key: value map");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kKnownKeys.count(key)) {
      throw ConfigParseError("unknown config key '" + key + "'");
    }
  }

  RunConfig cfg;
  cfg.source = std::move(source);
  auto& prov = cfg.provenance;

  ProblemSpec& p = cfg.problem;
  p.model = {read_matrix(root, "A"), read_matrix(root, "B"),
             read_matrix(root, "C"), read_matrix(root, "D")};
  p.model.check();
  const Matrix q = read_matrix(root, "Q");
  const Matrix r = read_matrix(root, "R");
  for (const auto& [name, w] : {std::pair{"Q", &q}, std::pair{"R", &r}}) {
    if (w->rows() != w->cols() || !w->isApprox(w->transpose(), 1e-12)) {
      throw ValidationError(std::string(name) + " must be square and symmetric");
    }
  }
  p.cost = {SymMatrix(q), read_matrix(root, "S"), SymMatrix(r)};
  p.x0 = read_vector(root, "x0");
  p.K0 = read_matrix(root, "K0");
  validate_problem(p);

  SimConfig& sim = cfg.sim;
  sim.x0 = p.x0;
  const SimConfig defaults;
  sim.horizon = resolve<double>(root, "horizon", {}, defaults.horizon, prov);
  sim.sample_interval =
      resolve<double>(root, "sample_interval", {}, defaults.sample_interval, prov);
  sim.step = resolve<double>(root, "step", {}, defaults.step, prov);
  sim.paths = resolve<int>(root, "paths", overrides.paths, defaults.paths, prov);
  sim.noise_std =
      resolve<double>(root, "noise_std", overrides.noise_std, defaults.noise_std, prov);
  sim.seed = resolve<std::uint64_t>(root, "seed", overrides.seed, defaults.seed, prov);

  const SolverConfig sdef;
  cfg.solver.eps_oracle =
      resolve<double>(root, "eps_oracle", {}, sdef.eps_oracle, prov);
  cfg.solver.eps_dd = resolve<double>(root, "eps_dd", overrides.eps, sdef.eps_dd, prov);
  cfg.solver.max_iter = resolve<int>(root, "max_iter", {}, sdef.max_iter, prov);
  cfg.solver.rank_tol = resolve<double>(root, "rank_tol", {}, sdef.rank_tol, prov);
  if (!(cfg.solver.eps_oracle > 0.0) || !(cfg.solver.eps_dd > 0.0) ||
      cfg.solver.max_iter < 1 || !(cfg.solver.rank_tol > 0.0)) {
    throw ValidationError(
        "solver settings must be positive (eps_oracle, eps_dd, max_iter, "
        "rank_tol)");
  }

  std::optional<std::string> mode_flag;
  if (overrides.mode) mode_flag = std::string(to_string(*overrides.mode));
  const auto mode_text = resolve<std::string>(root, "mode", mode_flag, "both", prov);
  const auto mode = parse_mode(mode_text);
  if (!mode) throw ConfigParseError("unknown mode '" + mode_text + "'");
  cfg.mode = *mode;

  std::optional<std::string> out_flag;
  if (overrides.out_dir) out_flag = overrides.out_dir->string();
  cfg.out_dir = resolve<std::string>(root, "out", out_flag, "slq_out", prov);
  cfg.dump_trajectories = overrides.dump_trajectories;

  sim.check(p.model.n(), p.model.m());
  return cfg;
}

RunConfig load_config(const std::string& path_or_name,
                      const Overrides& overrides) {
  std::ifstream in(path_or_name);
  if (in) {
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), overrides, path_or_name);
  }
  if (auto text = bundled_config(path_or_name)) {
    return parse_config(*text, overrides, "bundled:" + path_or_name);
  }
  throw ConfigParseError("cannot open config '" + path_or_name +
                         "' and no bundled scenario has that name");
}

}  // namespace slq::cli
