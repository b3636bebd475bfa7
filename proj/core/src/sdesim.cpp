#include "slq/sdesim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "slq/errors.hpp"

namespace slq {

namespace {

// Paths per reduction block. Fixed so the summation tree, and with it every
// bit of the output, is independent of the worker count.
constexpr int kBlockPaths = 32;

constexpr std::uint64_t kExplorationStream = 0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

int checked_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double rounded = std::round(r);
  if (!(rounded >= 1.0) || std::abs(r - rounded) > 1e-9 * std::max(1.0, r)) {
    std::ostringstream os;
    os << what << " (ratio " << r << " is not a positive integer)";
    throw ValidationError(os.str());
  }
  return static_cast<int>(rounded);
}

// Column offsets of the blocks inside one accumulator row.
struct Layout {
  Eigen::Index n, m, tri, eta, xx, xv, vv, width;
  Layout(Eigen::Index n_, Eigen::Index m_)
      : n(n_), m(m_), tri(tri_size(n_)), eta(0), xx(tri),
        xv(xx + n_ * n_), vv(xv + n_ * m_), width(vv + m_ * m_) {}
};

void simulate_path(const SystemModel& model, const Gain& K0,
                   const Matrix& exploration, const SimConfig& cfg, int path,
                   Matrix& states, Matrix& controls) {
  const Eigen::Index n = model.n(), m = model.m();
  const int steps = static_cast<int>(exploration.cols());
  const double h = cfg.step;
  const double sqrt_h = std::sqrt(h);

  states.resize(n, steps + 1);
  controls.resize(m, steps);
  states.col(0) = cfg.x0;

  // Paths 2k and 2k+1 are an antithetic pair: same stream, mirrored
  // Brownian increments.
  auto rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(path / 2) + 1);
  const double sign = (path % 2 == 0) ? 1.0 : -1.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(m), drift(n), diffusion(n);

  for (int k = 0; k < steps; ++k) {
    const auto x = states.col(k);
    v.noalias() = K0 * x;
    v += exploration.col(k);
    controls.col(k) = v;
    drift.noalias() = model.A * x;
    drift.noalias() += model.B * v;
    diffusion.noalias() = model.C * x;
    diffusion.noalias() += model.D * v;
    const double dW = sign * sqrt_h * gauss(rng);
    states.col(k + 1) = x + h * drift + dW * diffusion;
    const double norm = states.col(k + 1).norm();
    if (!(norm <= kOverflowGuard)) {
      std::ostringstream os;
      os << "trajectory blow-up on path " << path << " at t = " << (k + 1) * h
         << " (|X| = " << norm << "); K0 may not be stabilizing or the step "
         << "is too large";
      throw TrajectoryBlowupError(os.str());
    }
  }
}

// Adds one path's interval moments into acc (l x layout.width). Each Euler
// step contributes the trapezoid of its integrand; the exploration is held
// at e_k over step k, so the right endpoint control is K0 X_{k+1} + e_k.
void accumulate_path(const Matrix& states, const Matrix& controls,
                     const Matrix& exploration, const Gain& K0,
                     int steps_per_interval, double h, const Layout& lay,
                     Matrix& acc) {
  const Eigen::Index n = lay.n, m = lay.m;
  const auto pairs = triangle_pairs(n);
  const double half_h = 0.5 * h;
  const Eigen::Index l = acc.rows();
  Vector vb(m);

  for (Eigen::Index k = 0; k < l; ++k) {
    const int s0 = static_cast<int>(k) * steps_per_interval;
    const int s1 = s0 + steps_per_interval;
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      const auto [i, j] = pairs[c];
      acc(k, lay.eta + static_cast<Eigen::Index>(c)) +=
          states(i, s1) * states(j, s1) - states(i, s0) * states(j, s0);
    }
    for (int s = s0; s < s1; ++s) {
      const auto xa = states.col(s);
      const auto xb = states.col(s + 1);
      const auto va = controls.col(s);
      vb.noalias() = K0 * xb;
      vb += exploration.col(s);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          acc(k, lay.xx + i * n + j) +=
              half_h * (xa(i) * xa(j) + xb(i) * xb(j));
        }
        for (Eigen::Index j = 0; j < m; ++j) {
          acc(k, lay.xv + i * m + j) +=
              half_h * (xa(i) * va(j) + xb(i) * vb(j));
        }
      }
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
          acc(k, lay.vv + i * m + j) +=
              half_h * (va(i) * va(j) + vb(i) * vb(j));
        }
      }
    }
  }
}

// Runs body(block) for every block on up to `workers` threads and rethrows
// the first captured exception.
template <class Body>
void for_each_block(int blocks, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&] {
    for (int b = next++; b < blocks; b = next++) {
      try {
        body(b);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = blocks;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);
}

// Pairwise sum in a fixed tree order, then the Monte-Carlo mean.
DataMatrices finish(std::vector<Matrix> sums, int paths, const Layout& lay) {
  while (sums.size() > 1) {
    std::vector<Matrix> next;
    next.reserve((sums.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < sums.size(); i += 2) {
      next.push_back(sums[i] + sums[i + 1]);
    }
    if (sums.size() % 2 == 1) next.push_back(std::move(sums.back()));
    sums = std::move(next);
  }
  const Matrix mean = sums.front() / static_cast<double>(paths);
  DataMatrices d;
  d.l = mean.rows();
  d.n = lay.n;
  d.m = lay.m;
  d.eta_xx = mean.middleCols(lay.eta, lay.tri);
  d.delta_xx = mean.middleCols(lay.xx, lay.n * lay.n);
  d.delta_xv = mean.middleCols(lay.xv, lay.n * lay.m);
  d.delta_vv = mean.middleCols(lay.vv, lay.m * lay.m);
  return d;
}

int block_count(int paths) { return (paths + kBlockPaths - 1) / kBlockPaths; }

}  // namespace

int SimConfig::steps_per_interval() const {
  return checked_ratio(sample_interval, step,
                       "sample interval must be an integer multiple of the "
                       "Euler step");
}

int SimConfig::intervals() const {
  return checked_ratio(horizon, sample_interval,
                       "horizon must be an integer multiple of the sample "
                       "interval");
}

int SimConfig::steps() const { return steps_per_interval() * intervals(); }

void SimConfig::check(Eigen::Index n, Eigen::Index m) const {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ValidationError("Euler step must be positive and finite");
  }
  if (!(sample_interval > 0.0) || !(horizon > 0.0)) {
    throw ValidationError("horizon and sample interval must be positive");
  }
  (void)steps();
  if (paths < 1) throw ValidationError("paths must be at least 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ValidationError("noise_std must be finite and non-negative");
  }
  if (x0.size() != n || !x0.allFinite()) {
    throw ValidationError("x0 must be a finite vector with " +
                          std::to_string(n) + " entries");
  }
  const Eigen::Index required = tri_size(n) + m * n;
  if (intervals() < required) {
    throw ValidationError(
        "too few sampling intervals: l = " + std::to_string(intervals()) +
        " but the rank condition needs at least " + std::to_string(required));
  }
}

Vector TrajectoryBatch::control_end(int path, int k) const {
  return K0 * states[static_cast<std::size_t>(path)].col(k + 1) +
         exploration.col(k);
}

unsigned default_workers() {
  if (const char* env = std::getenv("SLQ_PILOT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Matrix exploration_signal(const SimConfig& cfg, Eigen::Index m) {
  const int steps = cfg.steps();
  Matrix e(m, steps);
  auto rng = stream_rng(cfg.seed, kExplorationStream);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < steps; ++k) {
    for (Eigen::Index j = 0; j < m; ++j) e(j, k) = cfg.noise_std * gauss(rng);
  }
  return e;
}

TrajectoryBatch simulate_batch(const SystemModel& model, const Gain& K0,
                               const SimConfig& cfg, unsigned workers) {
  model.check();
  cfg.check(model.n(), model.m());
  if (workers == 0) workers = default_workers();

  TrajectoryBatch batch;
  batch.n = model.n();
  batch.m = model.m();
  batch.steps = cfg.steps();
  batch.step = cfg.step;
  batch.K0 = K0;
  batch.exploration = exploration_signal(cfg, model.m());
  batch.states.resize(static_cast<std::size_t>(cfg.paths));
  batch.controls.resize(static_cast<std::size_t>(cfg.paths));

  for_each_block(block_count(cfg.paths), workers, [&](int b) {
    const int end = std::min(cfg.paths, (b + 1) * kBlockPaths);
    for (int p = b * kBlockPaths; p < end; ++p) {
      simulate_path(model, K0, batch.exploration, cfg, p,
                    batch.states[static_cast<std::size_t>(p)],
                    batch.controls[static_cast<std::size_t>(p)]);
    }
  });
  return batch;
}

DataMatrices accumulate_data(const TrajectoryBatch& batch,
                             const SimConfig& cfg, unsigned workers) {
  const int spi = cfg.steps_per_interval();
  const int l = cfg.intervals();
  if (batch.steps != spi * l || batch.step != cfg.step ||
      batch.paths() != cfg.paths) {
    throw DimensionError("trajectory batch grid does not match the config");
  }
  if (workers == 0) workers = default_workers();
  const Layout lay(batch.n, batch.m);
  std::vector<Matrix> sums(static_cast<std::size_t>(block_count(cfg.paths)));

  for_each_block(static_cast<int>(sums.size()), workers, [&](int b) {
    Matrix acc = Matrix::Zero(l, lay.width);
    const int end = std::min(cfg.paths, (b + 1) * kBlockPaths);
    for (int p = b * kBlockPaths; p < end; ++p) {
      accumulate_path(batch.states[static_cast<std::size_t>(p)],
                      batch.controls[static_cast<std::size_t>(p)],
                      batch.exploration, batch.K0, spi, cfg.step, lay, acc);
    }
    sums[static_cast<std::size_t>(b)] = std::move(acc);
  });
  return finish(std::move(sums), cfg.paths, lay);
}

DataMatrices collect_data(const SystemModel& model, const Gain& K0,
                          const SimConfig& cfg, unsigned workers) {
  model.check();
  cfg.check(model.n(), model.m());
  if (workers == 0) workers = default_workers();
  const int spi = cfg.steps_per_interval();
  const int l = cfg.intervals();
  const Layout lay(model.n(), model.m());
  const Matrix exploration = exploration_signal(cfg, model.m());
  std::vector<Matrix> sums(static_cast<std::size_t>(block_count(cfg.paths)));

  for_each_block(static_cast<int>(sums.size()), workers, [&](int b) {
    Matrix acc = Matrix::Zero(l, lay.width);
    Matrix states, controls;
    const int end = std::min(cfg.paths, (b + 1) * kBlockPaths);
    for (int p = b * kBlockPaths; p < end; ++p) {
      simulate_path(model, K0, exploration, cfg, p, states, controls);
      accumulate_path(states, controls, exploration, K0, spi, cfg.step, lay,
                      acc);
    }
    sums[static_cast<std::size_t>(b)] = std::move(acc);
  });
  return finish(std::move(sums), cfg.paths, lay);
}

void write_trajectory_csv(std::ostream& os, const TrajectoryBatch& batch) {
  os << "path,time";
  for (Eigen::Index i = 0; i < batch.n; ++i) os << ",x" << i + 1;
  for (Eigen::Index j = 0; j < batch.m; ++j) os << ",v" << j + 1;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (int p = 0; p < batch.paths(); ++p) {
    const Matrix& xs = batch.states[static_cast<std::size_t>(p)];
    const Matrix& vs = batch.controls[static_cast<std::size_t>(p)];
    for (int k = 0; k <= batch.steps; ++k) {
      os << p << ',' << k * batch.step;
      for (Eigen::Index i = 0; i < batch.n; ++i) os << ',' << xs(i, k);
      const Vector v =
          k < batch.steps ? Vector(vs.col(k)) : batch.control_end(p, k - 1);
      for (Eigen::Index j = 0; j < batch.m; ++j) os << ',' << v(j);
      os << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace slq
