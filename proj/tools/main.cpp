// slq-pilot: solve a stochastic LQ problem with the model-based oracle,
// the data-driven solver, or both, and write the run record.

#include <iostream>

#include "CLI11.hpp"
#include "slq/cli/config.hpp"
#include "slq/cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace slq::cli;

  CLI::App app{"Stochastic LQ policy iteration: model-based and data-driven"};
  std::string config;
  std::string mode_text;
  Overrides ov;
  std::uint64_t seed = 0;
  int paths = 0;
  double noise_std = 0.0, eps = 0.0;
  std::string out;

  app.add_option("--config", config,
                 "config file, or a bundled scenario name (oscillator)")
      ->required();
  auto* mode_opt =
      app.add_option("--mode", mode_text, "oracle | datadriven | both | validate")
          ->check(CLI::IsMember({"oracle", "datadriven", "both", "validate"}));
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  auto* paths_opt = app.add_option("--paths", paths, "Monte-Carlo paths")
                        ->check(CLI::PositiveNumber);
  auto* noise_opt = app.add_option("--noise-std", noise_std,
                                   "exploration noise standard deviation")
                        ->check(CLI::NonNegativeNumber);
  auto* eps_opt = app.add_option("--eps", eps,
                                 "data-driven stopping threshold on |P_i - P_{i+1}|_F")
                      ->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out, "output directory");
  app.add_flag("--dump-trajectories", ov.dump_trajectories,
               "write every simulated path to trajectories.csv");

  CLI11_PARSE(app, argc, argv);

  if (*mode_opt) ov.mode = parse_mode(mode_text);
  if (*seed_opt) ov.seed = seed;
  if (*paths_opt) ov.paths = paths;
  if (*noise_opt) ov.noise_std = noise_std;
  if (*eps_opt) ov.eps = eps;
  if (*out_opt) ov.out_dir = out;

  RunConfig cfg;
  try {
    cfg = load_config(config, ov);
  } catch (const slq::Error& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return exit_code_for_current_exception();
  }

  const RunResult result = run(cfg, std::cout);
  if (result.exit_code != kExitOk) {
    std::cerr << "slq-pilot: " << result.message << "\n";
  }
  return result.exit_code;
}
