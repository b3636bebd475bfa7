#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"
#include "slq/cli/config.hpp"
#include "slq/cli/runner.hpp"

namespace slq::cli {
namespace {

namespace fs = std::filesystem;

std::string bundled_text() { return std::string(*bundled_config("oscillator")); }

// Swaps the value of one top-level key in the bundled config.
std::string with_line(const std::string& key, const std::string& value) {
  std::istringstream in(bundled_text());
  std::ostringstream out;
  std::string line;
  bool replaced = false;
  while (std::getline(in, line)) {
    if (line.rfind(key + ":", 0) == 0) {
      out << key << ": " << value << '\n';
      replaced = true;
    } else {
      out << line << '\n';
    }
  }
  EXPECT_TRUE(replaced) << key;
  return out.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("slq_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Config, BundledScenarioLoads) {
  const RunConfig cfg = load_config("oscillator");
  EXPECT_EQ(cfg.source, "bundled:oscillator");
  EXPECT_EQ(cfg.problem.model.n(), 2);
  EXPECT_EQ(cfg.problem.model.m(), 1);
  EXPECT_EQ(cfg.sim.paths, 2000);
  EXPECT_EQ(cfg.sim.intervals(), 400);
  EXPECT_EQ(cfg.sim.seed, 7u);
  EXPECT_EQ(cfg.mode, Mode::Both);
  EXPECT_EQ(cfg.provenance.at("seed"), "config");
}

TEST(Config, FlagsBeatConfig) {
  Overrides ov;
  ov.seed = 11;
  ov.paths = 64;
  ov.eps = 1e-4;
  ov.mode = Mode::Oracle;
  const RunConfig cfg = parse_config(bundled_text(), ov);
  EXPECT_EQ(cfg.sim.seed, 11u);
  EXPECT_EQ(cfg.sim.paths, 64);
  EXPECT_EQ(cfg.solver.eps_dd, 1e-4);
  EXPECT_EQ(cfg.mode, Mode::Oracle);
  EXPECT_EQ(cfg.provenance.at("seed"), "flag");
  EXPECT_EQ(cfg.provenance.at("eps_dd"), "flag");
}

TEST(Config, ModeNames) {
  for (Mode m : {Mode::Oracle, Mode::DataDriven, Mode::Both, Mode::Validate}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_FALSE(parse_mode("fast"));
}

TEST(Config, IndefiniteControlWeight) {
  try {
    parse_config(with_line("R", "[[-1]]"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("R is not positive definite"), std::string::npos)
        << e.what();
  }
}

TEST(Config, NonStabilizingInitialGain) {
  try {
    parse_config(with_line("K0", "[[20, 0]]"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("not a mean-square stabilizer"), std::string::npos)
        << e.what();
  }
}

TEST(Config, MalformedInput) {
  EXPECT_THROW(parse_config(bundled_text() + "bogus: 1\n"), ConfigParseError);
  EXPECT_THROW(parse_config(with_line("A", "[[0, -0.6], [0.6]]")), ConfigParseError);
  EXPECT_THROW(parse_config(with_line("A", "[[0, x], [0.6, -0.3]]")), ConfigParseError);
  EXPECT_THROW(parse_config(with_line("mode", "fast")), ConfigParseError);
  EXPECT_THROW(parse_config("A: [[0]"), ConfigParseError);
  EXPECT_THROW(parse_config(with_line("Q", "[[1, 0.5], [0, 0.1]]")), ValidationError);
  EXPECT_THROW(parse_config(with_line("B", "[[0.05, 1], [0.01, 1]]")), DimensionError);
  EXPECT_THROW(parse_config(with_line("step", "0.003")), ValidationError);
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigParseError);
}

TEST(Runner, ValidateModeWritesOnlyManifest) {
  Overrides ov;
  ov.mode = Mode::Validate;
  ov.out_dir = scratch("validate");
  const RunConfig cfg = parse_config(bundled_text(), ov);
  std::ostringstream log;
  const RunResult r = run(cfg, log);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(fs::exists(*ov.out_dir / "manifest.json"));
  EXPECT_FALSE(fs::exists(*ov.out_dir / "history.csv"));
  EXPECT_FALSE(fs::exists(*ov.out_dir / "final.csv"));
}

TEST(Runner, MissingExplorationExitsRankDeficient) {
  Overrides ov;
  ov.noise_std = 0.0;
  ov.paths = 64;
  ov.mode = Mode::DataDriven;
  ov.out_dir = scratch("rank");
  std::ostringstream log;
  const RunResult r = run(parse_config(bundled_text(), ov), log);
  EXPECT_EQ(r.exit_code, kExitRankDeficient);
  ASSERT_TRUE(r.rank);
  EXPECT_FALSE(r.rank->ok);
  const auto manifest = nlohmann::json::parse(read_file(*ov.out_dir / "manifest.json"));
  EXPECT_EQ(manifest["status"]["exit_code"], kExitRankDeficient);
}

TEST(Runner, OracleIterationLimitExitsNotConverged) {
  Overrides ov;
  ov.mode = Mode::Oracle;
  ov.out_dir = scratch("limit");
  const RunConfig cfg = parse_config(with_line("max_iter", "1"), ov);
  std::ostringstream log;
  EXPECT_EQ(run(cfg, log).exit_code, kExitNotConverged);
}

TEST(Runner, ComparisonRecomputableFromFinalCsv) {
  Overrides ov;
  ov.out_dir = scratch("both");
  const RunConfig cfg = parse_config(bundled_text(), ov);
  std::ostringstream log;
  const RunResult r = run(cfg, log);
  ASSERT_EQ(r.exit_code, kExitOk) << r.message;

  std::map<std::string, double> values;
  std::istringstream in(read_file(*ov.out_dir / "final.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "solver,quantity,row,col,value");
  while (std::getline(in, line)) {
    const auto last = line.rfind(',');
    values[line.substr(0, last)] = std::stod(line.substr(last + 1));
  }
  double max_p = 0.0, max_k = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const std::string idx = "," + std::to_string(i) + "," + std::to_string(j);
      max_p = std::max(max_p, std::abs(values.at("datadriven,P" + idx) -
                                       values.at("oracle,P" + idx)));
    }
  }
  for (int j = 0; j < 2; ++j) {
    const std::string idx = ",0," + std::to_string(j);
    max_k = std::max(max_k, std::abs(values.at("datadriven,K" + idx) -
                                     values.at("oracle,K" + idx)));
  }
  const auto manifest = nlohmann::json::parse(read_file(*ov.out_dir / "manifest.json"));
  EXPECT_NEAR(manifest["comparison"]["max_abs_diff_P"].get<double>(), max_p, 1e-15);
  EXPECT_NEAR(manifest["comparison"]["max_abs_diff_K"].get<double>(), max_k, 1e-15);
  EXPECT_LE(values.at("datadriven,sare_residual_frobenius,0,0"), 5e-3);
  EXPECT_EQ(manifest["rank_check"]["ok"], true);

  std::istringstream hist(read_file(*ov.out_dir / "history.csv"));
  std::getline(hist, line);
  EXPECT_EQ(line, "iteration,solver,dP_frobenius,sare_residual_frobenius");
}

}  // namespace
}  // namespace slq::cli
