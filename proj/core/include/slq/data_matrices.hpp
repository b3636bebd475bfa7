#pragma once

#include "slq/matops.hpp"

namespace slq {

/// Monte-Carlo estimates of the interval moments over l sampling
/// intervals [t_{k-1}, t_k]. Row k holds
///
///   eta_xx   : E[bar(X(t_k)) - bar(X(t_{k-1}))]          (n(n+1)/2)
///   delta_xx : E[int X kron X ds]                         (n^2)
///   delta_xv : E[int X kron v ds]                         (n m)
///   delta_vv : E[int v kron v ds]                         (m^2)
///
/// Kronecker products of column vectors: (x kron y)_{i*dim(y)+j} = x_i y_j.
struct DataMatrices {
  Matrix eta_xx;
  Matrix delta_xx;
  Matrix delta_xv;
  Matrix delta_vv;
  Eigen::Index l = 0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;

  static DataMatrices zeros(Eigen::Index l, Eigen::Index n, Eigen::Index m);

  /// Throws DimensionError when a block does not have the stated shape.
  void check() const;
  bool all_finite() const;
};

struct RankCheck {
  bool ok = false;
  int rank = 0;
  int required = 0;
};

/// Identifiability test: rank([delta_xx, delta_xv]) == m n + n(n+1)/2.
RankCheck check_rank(const DataMatrices& data, double tol = 1e-8);

}  // namespace slq
