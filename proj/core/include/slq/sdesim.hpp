#pragma once

// Euler-Maruyama simulation of the controlled SDE under the exploratory
// policy v = K0 X + e and Monte-Carlo accumulation of the interval
// moments consumed by the data-driven solver.
//
// Randomness: the exploration signal e (one N(0, sigma^2 I_m) draw per
// Euler step, held constant over the step) is a single realization shared
// by all paths; each path draws its own Brownian increments. E[.] therefore
// averages over W only, and E[X kron e] keeps the excitation that
// identifies the gain block. Every stream is derived from (seed, stream
// index), so results do not depend on worker count or path order.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "slq/data_matrices.hpp"
#include "slq/problem.hpp"

namespace slq {

struct SimConfig {
  Vector x0;
  double horizon = 4.0;           // T
  double step = 1e-3;             // Euler step h
  double sample_interval = 1e-2;  // sampling interval between data rows
  int paths = 2000;               // Monte-Carlo paths M
  double noise_std = 0.3;         // exploration sigma
  std::uint64_t seed = 7;

  int steps_per_interval() const;
  int intervals() const;  // l
  int steps() const;      // T / h

  /// Grid and budget invariants for an n-state, m-input system: positive
  /// step, interval a multiple of the step, horizon a multiple of the
  /// interval, enough rows for the rank condition. Throws ValidationError.
  void check(Eigen::Index n, Eigen::Index m) const;
};

/// Full trajectories. states[p] is n x (steps+1) with column k = X(k h);
/// controls[p] is m x steps with column k = K0 X(k h) + e_k.
struct TrajectoryBatch {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  int steps = 0;
  double step = 0.0;
  Gain K0;
  Matrix exploration;  // m x steps, shared by every path
  std::vector<Matrix> states;
  std::vector<Matrix> controls;

  int paths() const noexcept { return static_cast<int>(states.size()); }

  /// Control right before the end of step k: K0 X((k+1) h) + e_k.
  Vector control_end(int path, int k) const;
};

/// States whose Euclidean norm exceeds this abort the simulation.
inline constexpr double kOverflowGuard = 1e6;

/// Worker count from SLQ_PILOT_THREADS, else hardware concurrency.
unsigned default_workers();

/// The shared exploration signal for cfg (m x steps).
Matrix exploration_signal(const SimConfig& cfg, Eigen::Index m);

TrajectoryBatch simulate_batch(const SystemModel& model, const Gain& K0,
                               const SimConfig& cfg, unsigned workers = 0);

DataMatrices accumulate_data(const TrajectoryBatch& batch,
                             const SimConfig& cfg, unsigned workers = 0);

/// simulate_batch + accumulate_data without materializing the batch.
/// Bit-identical to the two-step route.
DataMatrices collect_data(const SystemModel& model, const Gain& K0,
                          const SimConfig& cfg, unsigned workers = 0);

/// CSV with header path,time,x1..xn,v1..vm; one row per Euler step plus a
/// terminal row at t = T whose control is the end-of-step value.
void write_trajectory_csv(std::ostream& os, const TrajectoryBatch& batch);

}  // namespace slq
