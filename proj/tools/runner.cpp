#include "slq/cli/runner.hpp"

#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace slq::cli {

namespace {

using nlohmann::json;

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json config_echo(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  json j;
  j["source"] = cfg.source;
  j["A"] = to_json(p.model.A);
  j["B"] = to_json(p.model.B);
  j["C"] = to_json(p.model.C);
  j["D"] = to_json(p.model.D);
  j["Q"] = to_json(p.cost.Q.matrix());
  j["S"] = to_json(p.cost.S);
  j["R"] = to_json(p.cost.R.matrix());
  j["x0"] = to_json(p.x0);
  j["K0"] = to_json(p.K0);
  j["horizon"] = cfg.sim.horizon;
  j["sample_interval"] = cfg.sim.sample_interval;
  j["step"] = cfg.sim.step;
  j["paths"] = cfg.sim.paths;
  j["noise_std"] = cfg.sim.noise_std;
  j["seed"] = cfg.sim.seed;
  j["intervals"] = cfg.sim.intervals();
  j["eps_oracle"] = cfg.solver.eps_oracle;
  j["eps_dd"] = cfg.solver.eps_dd;
  j["max_iter"] = cfg.solver.max_iter;
  j["rank_tol"] = cfg.solver.rank_tol;
  j["mode"] = std::string(to_string(cfg.mode));
  j["out"] = cfg.out_dir.string();
  j["dump_trajectories"] = cfg.dump_trajectories;
  j["provenance"] = cfg.provenance;
  return j;
}

json oracle_json(const OracleReport& r) {
  json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["P_star"] = to_json(r.P_star.matrix());
  j["K_star"] = to_json(r.K_star);
  j["final_residual_frobenius"] =
      r.history.empty() ? 0.0 : r.history.back().residual_frobenius;
  return j;
}

json dd_json(const DDReport& r, double residual) {
  json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["rank"] = {{"ok", r.rank.ok}, {"rank", r.rank.rank}, {"required", r.rank.required}};
  j["P_tilde"] = to_json(r.P_tilde.matrix());
  j["K_tilde"] = to_json(r.K_tilde);
  j["sare_residual_frobenius"] = residual;
  return j;
}

struct HistoryRow {
  int iteration;
  const char* solver;
  double dP;
  double residual;
};

void write_history(const std::filesystem::path& file,
                   const std::vector<HistoryRow>& rows) {
  std::ofstream os(file, std::ios::binary);
  os << "iteration,solver,dP_frobenius,sare_residual_frobenius\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << r.solver << ',' << num(r.dP) << ','
       << num(r.residual) << '\n';
  }
}

void write_matrix_rows(std::ostream& os, const char* solver, const char* name,
                       const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << solver << ',' << name << ',' << i << ',' << j << ',' << num(m(i, j))
         << '\n';
    }
  }
}

}  // namespace

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigParseError&) {
    return kExitValidation;
  } catch (const ValidationError&) {
    return kExitValidation;
  } catch (const DimensionError&) {
    return kExitValidation;
  } catch (const RankDeficientError&) {
    return kExitRankDeficient;
  } catch (const NotConvergedError<OracleReport>&) {
    return kExitNotConverged;
  } catch (const NotConvergedError<DDReport>&) {
    return kExitNotConverged;
  } catch (const SingularGeneratorError&) {
    return kExitNumerical;
  } catch (const NumericalBreakdownError&) {
    return kExitNumerical;
  } catch (const TrajectoryBlowupError&) {
    return kExitNumerical;
  } catch (...) {
    return kExitNumerical;
  }
}

RunResult run(const RunConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  RunResult result;
  const auto& problem = cfg.problem;
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  json manifest;
  manifest["tool"] = "slq-pilot";
  manifest["versions"] = {
      {"slq_pilot", SLQ_VERSION},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__}};
  manifest["seed"] = cfg.sim.seed;
  manifest["config"] = config_echo(cfg);
  manifest["started_utc"] = started;

  std::vector<HistoryRow> history;
  std::ostringstream final_csv;
  final_csv << "solver,quantity,row,col,value\n";

  fs::create_directories(cfg.out_dir);
  try {
    if (cfg.mode == Mode::Validate) {
      log << "config valid: " << cfg.source << "\n";
    }

    if (cfg.mode == Mode::Oracle || cfg.mode == Mode::Both) {
      const OracleReport rep = policy_iteration(
          problem, {cfg.solver.eps_oracle, cfg.solver.max_iter});
      for (const auto& h : rep.history) {
        history.push_back({h.index + 1, "oracle", h.dP_frobenius, h.residual_frobenius});
      }
      write_matrix_rows(final_csv, "oracle", "P", rep.P_star.matrix());
      write_matrix_rows(final_csv, "oracle", "K", rep.K_star);
      write_matrix_rows(final_csv, "oracle", "sare_residual_frobenius",
                        Matrix::Constant(1, 1, rep.history.back().residual_frobenius));
      manifest["oracle"] = oracle_json(rep);
      log << "oracle: converged in " << rep.iterations << " iterations\n"
          << "  P* =\n" << rep.P_star.matrix() << "\n  K* = " << rep.K_star << "\n";
      result.oracle = rep;
    }

    if (cfg.mode == Mode::DataDriven || cfg.mode == Mode::Both) {
      const unsigned workers = default_workers();
      DataMatrices data;
      if (cfg.dump_trajectories) {
        const TrajectoryBatch batch =
            simulate_batch(problem.model, problem.K0, cfg.sim, workers);
        std::ofstream dump(cfg.out_dir / "trajectories.csv", std::ios::binary);
        write_trajectory_csv(dump, batch);
        data = accumulate_data(batch, cfg.sim, workers);
      } else {
        data = collect_data(problem.model, problem.K0, cfg.sim, workers);
      }
      result.rank = check_rank(data, cfg.solver.rank_tol);
      manifest["rank_check"] = {{"ok", result.rank->ok},
                                {"rank", result.rank->rank},
                                {"required", result.rank->required}};
      log << "data: l = " << data.l << ", rank([delta_xx, delta_xv]) = "
          << result.rank->rank << " (required " << result.rank->required << ")\n";

      DDOptions opts;
      opts.eps = cfg.solver.eps_dd;
      opts.max_iter = cfg.solver.max_iter;
      opts.rank_tol = cfg.solver.rank_tol;
      const DDReport rep =
          run_algorithm1(data, problem.model.D, problem.cost, problem.K0, opts);
      // The model is known here only because the data were simulated; the
      // residual is a diagnostic, not an input to the solver.
      for (const auto& h : rep.history) {
        const double res =
            sare_residual(problem.model, problem.cost, h.P, h.K).matrix().norm();
        history.push_back({h.index + 1, "datadriven", h.dP_frobenius, res});
      }
      const double res = sare_residual(problem.model, problem.cost, rep.P_tilde,
                                       rep.K_tilde).matrix().norm();
      write_matrix_rows(final_csv, "datadriven", "P", rep.P_tilde.matrix());
      write_matrix_rows(final_csv, "datadriven", "K", rep.K_tilde);
      write_matrix_rows(final_csv, "datadriven", "sare_residual_frobenius",
                        Matrix::Constant(1, 1, res));
      manifest["datadriven"] = dd_json(rep, res);
      log << "datadriven: converged in " << rep.iterations << " iterations\n"
          << "  P~ =\n" << rep.P_tilde.matrix() << "\n  K~ = " << rep.K_tilde
          << "\n  |R(P~, K~)|_F = " << res << "\n";
      result.datadriven = rep;
    }

    if (result.oracle && result.datadriven) {
      const Matrix dP = (result.datadriven->P_tilde.matrix() -
                         result.oracle->P_star.matrix()).cwiseAbs();
      const Matrix dK = (result.datadriven->K_tilde - result.oracle->K_star).cwiseAbs();
      manifest["comparison"] = {
          {"abs_diff_P", to_json(dP)},
          {"abs_diff_K", to_json(dK)},
          {"max_abs_diff_P", dP.maxCoeff()},
          {"max_abs_diff_K", dK.maxCoeff()},
          {"oracle_residual_frobenius", manifest["oracle"]["final_residual_frobenius"]},
          {"datadriven_residual_frobenius",
           manifest["datadriven"]["sare_residual_frobenius"]}};
      log << "comparison: max |P~ - P*| = " << dP.maxCoeff()
          << ", max |K~ - K*| = " << dK.maxCoeff() << "\n";
    }
    result.exit_code = kExitOk;
    result.message = "ok";
  } catch (const Error& e) {
    result.exit_code = exit_code_for_current_exception();
    result.message = e.what();
    log << "error: " << e.what() << "\n";
  }

  manifest["status"] = {{"exit_code", result.exit_code}, {"message", result.message}};
  manifest["finished_utc"] = utc_now();
  manifest["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (cfg.mode != Mode::Validate) {
    write_history(cfg.out_dir / "history.csv", history);
    std::ofstream(cfg.out_dir / "final.csv", std::ios::binary) << final_csv.str();
  }
  result.manifest_json = manifest.dump(2);
  std::ofstream(cfg.out_dir / "manifest.json", std::ios::binary)
      << result.manifest_json << '\n';
  return result;
}

}  // namespace slq::cli
