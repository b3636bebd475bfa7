#include "slq/data_matrices.hpp"

#include <string>

#include "slq/errors.hpp"

namespace slq {

DataMatrices DataMatrices::zeros(Eigen::Index l, Eigen::Index n,
                                 Eigen::Index m) {
  DataMatrices d;
  d.l = l;
  d.n = n;
  d.m = m;
  d.eta_xx = Matrix::Zero(l, tri_size(n));
  d.delta_xx = Matrix::Zero(l, n * n);
  d.delta_xv = Matrix::Zero(l, n * m);
  d.delta_vv = Matrix::Zero(l, m * m);
  return d;
}

void DataMatrices::check() const {
  auto expect = [&](const Matrix& x, Eigen::Index cols, const char* name) {
    if (x.rows() != l || x.cols() != cols) {
      throw DimensionError(std::string(name) + " must be " +
                           std::to_string(l) + "x" + std::to_string(cols) +
                           ", got " + std::to_string(x.rows()) + "x" +
                           std::to_string(x.cols()));
    }
  };
  expect(eta_xx, tri_size(n), "eta_xx");
  expect(delta_xx, n * n, "delta_xx");
  expect(delta_xv, n * m, "delta_xv");
  expect(delta_vv, m * m, "delta_vv");
}

bool DataMatrices::all_finite() const {
  return eta_xx.allFinite() && delta_xx.allFinite() &&
         delta_xv.allFinite() && delta_vv.allFinite();
}

RankCheck check_rank(const DataMatrices& data, double tol) {
  data.check();
  RankCheck out;
  out.required = static_cast<int>(data.m * data.n + tri_size(data.n));
  Matrix joined(data.l, data.delta_xx.cols() + data.delta_xv.cols());
  joined << data.delta_xx, data.delta_xv;
  out.rank = numeric_rank(joined, tol);
  out.ok = out.rank == out.required;
  return out;
}

}  // namespace slq
