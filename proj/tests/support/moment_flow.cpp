#include "moment_flow.hpp"

#include <cmath>

namespace slq::testing {

namespace {

// State layout: [mu (n), vec Sigma (n^2), int vec Sigma (n^2),
//                int vec E[X v'] (n m), int vec E[v v'] (m^2)]
struct Flow {
  const Matrix& A_K;
  const Matrix& C_K;
  const Matrix& B;
  const Matrix& D;
  const Gain& K0;
  const std::function<Vector(double)>& exploration;
  Eigen::Index n, m;

  Vector e(double t) const {
    return exploration ? exploration(t) : Vector(Vector::Zero(m));
  }

  Vector operator()(double t, const Vector& y) const {
    const Vector mu = y.head(n);
    const Matrix sigma = Eigen::Map<const Matrix>(y.data() + n, n, n);
    const Vector ev = e(t);

    const Vector dmu = A_K * mu + B * ev;
    const Matrix be_mu = B * ev * mu.transpose();
    const Matrix ce = C_K * mu * ev.transpose() * D.transpose();
    const Matrix dsigma = A_K * sigma + sigma * A_K.transpose() +
                          C_K * sigma * C_K.transpose() + be_mu +
                          be_mu.transpose() + ce + ce.transpose() +
                          D * ev * ev.transpose() * D.transpose();
    const Matrix xv = sigma * K0.transpose() + mu * ev.transpose();  // E[X v']
    const Matrix kmu_e = K0 * mu * ev.transpose();
    const Matrix vv = K0 * sigma * K0.transpose() + kmu_e +
                      kmu_e.transpose() + ev * ev.transpose();

    Vector dy(y.size());
    Eigen::Index o = 0;
    dy.segment(o, n) = dmu;
    o += n;
    dy.segment(o, n * n) = Eigen::Map<const Vector>(dsigma.data(), n * n);
    o += n * n;
    dy.segment(o, n * n) = Eigen::Map<const Vector>(sigma.data(), n * n);
    o += n * n;
    dy.segment(o, n * m) = Eigen::Map<const Vector>(xv.data(), n * m);
    o += n * m;
    dy.segment(o, m * m) = Eigen::Map<const Vector>(vv.data(), m * m);
    return dy;
  }
};

template <class F>
Vector rk4(const F& f, double t, const Vector& y, double h) {
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + h / 2, y + h / 2 * k1);
  const Vector k3 = f(t + h / 2, y + h / 2 * k2);
  const Vector k4 = f(t + h, y + h * k3);
  return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

std::function<Vector(double)> multisine_exploration(Eigen::Index m,
                                                    double amplitude) {
  return [m, amplitude](double t) {
    Vector e(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double s = static_cast<double>(j + 1);
      e(j) = amplitude * (std::sin(3.1 * s * t) + 0.8 * std::sin(7.7 * s * t + 0.3) +
                          0.6 * std::cos(13.3 * s * t) + 0.4 * std::sin(29.0 * s * t));
    }
    return e;
  };
}

DataMatrices exact_moment_data(const SystemModel& model, const Gain& K0,
                               const Vector& x0, const MomentFlowOptions& opts) {
  const Eigen::Index n = model.n(), m = model.m();
  const ClosedLoop cl = closed_loop(model, K0);
  const Flow flow{cl.A_K, cl.C_K, model.B, model.D, K0, opts.exploration, n, m};
  const auto l = static_cast<Eigen::Index>(std::llround(opts.horizon / opts.sample_interval));
  const double h = opts.sample_interval / opts.rk_steps_per_interval;
  const auto pairs = triangle_pairs(n);

  Vector y = Vector::Zero(n + 2 * n * n + n * m + m * m);
  y.head(n) = x0;
  const Matrix sigma0 = x0 * x0.transpose();
  y.segment(n, n * n) = Eigen::Map<const Vector>(sigma0.data(), n * n);

  auto moments_bar = [&](const Vector& state) {
    Vector b(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      const auto [i, j] = pairs[c];
      b(static_cast<Eigen::Index>(c)) = state(n + i + j * n);
    }
    return b;
  };

  DataMatrices d = DataMatrices::zeros(l, n, m);
  double t = 0.0;
  for (Eigen::Index k = 0; k < l; ++k) {
    const Vector start = y;
    // Restart the running integrals for this interval.
    y.tail(n * n + n * m + m * m).setZero();
    for (int s = 0; s < opts.rk_steps_per_interval; ++s) {
      y = rk4(flow, t, y, h);
      t = static_cast<double>(k) * opts.sample_interval + (s + 1) * h;
    }
    d.eta_xx.row(k) = (moments_bar(y) - moments_bar(start)).transpose();
    const Eigen::Index o = n + n * n;
    // int vec(Sigma): Sigma symmetric, so column-major vec equals X kron X.
    d.delta_xx.row(k) = y.segment(o, n * n).transpose();
    // E[X v'] column-major index i + j n; X kron v index i m + j.
    const Matrix xv = Eigen::Map<const Matrix>(y.data() + o + n * n, n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) d.delta_xv(k, i * m + j) = xv(i, j);
    const Matrix vv = Eigen::Map<const Matrix>(y.data() + o + n * n + n * m, m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) d.delta_vv(k, i * m + j) = vv(i, j);
  }
  return d;
}

std::vector<Matrix> second_moment_path(const SystemModel& model, const Gain& K0,
                                       const Vector& x0,
                                       const MomentFlowOptions& opts) {
  const Eigen::Index n = model.n(), m = model.m();
  const ClosedLoop cl = closed_loop(model, K0);
  const Flow flow{cl.A_K, cl.C_K, model.B, model.D, K0, opts.exploration, n, m};
  const auto l = static_cast<Eigen::Index>(std::llround(opts.horizon / opts.sample_interval));
  const double h = opts.sample_interval / opts.rk_steps_per_interval;

  Vector y = Vector::Zero(n + 2 * n * n + n * m + m * m);
  y.head(n) = x0;
  const Matrix sigma0 = x0 * x0.transpose();
  y.segment(n, n * n) = Eigen::Map<const Vector>(sigma0.data(), n * n);
  std::vector<Matrix> out{sigma0};
  double t = 0.0;
  for (Eigen::Index k = 0; k < l; ++k) {
    for (int s = 0; s < opts.rk_steps_per_interval; ++s) {
      y = rk4(flow, t, y, h);
      t = static_cast<double>(k) * opts.sample_interval + (s + 1) * h;
    }
    out.push_back(Eigen::Map<const Matrix>(y.data() + n, n, n));
  }
  return out;
}

}  // namespace slq::testing
