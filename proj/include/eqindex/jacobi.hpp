#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "eqindex/errors.hpp"

namespace eqindex {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns match `values`
};

/// Cyclic Jacobi rotations with a threshold sweep.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `rel_tol * ||M||_F`. Eigenvectors inside a cluster of eigenvalues closer
/// than `cluster_tol` are re-orthonormalized by modified Gram-Schmidt.
inline SymmetricEigen eigendecompose_symmetric(const Eigen::MatrixXd& M, double rel_tol = 1e-12,
                                               double cluster_tol = 1e-8, int max_sweeps = 100) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw DimensionError("eigendecompose_symmetric: matrix is not square");
  const double scale = std::max(1.0, M.norm());
  if ((M - M.transpose()).norm() > 1e-10 * scale)
    throw ValidationError("eigendecompose_symmetric: matrix is not symmetric to 1e-10");

  Eigen::MatrixXd a = 0.5 * (M + M.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double fro = a.norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double off = off_norm();
    if (off <= rel_tol * fro || off == 0.0) break;
    // Early sweeps skip rotations that are small relative to the current mean.
    const double threshold = sweep < 3 ? 0.2 * off / double(n * n) : 0.0;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= threshold || apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });

  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }

  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && out.values[end] - out.values[end - 1] < cluster_tol) ++end;
    for (Eigen::Index k = start; k < end; ++k) {
      for (Eigen::Index j = start; j < k; ++j)
        out.vectors.col(k) -= out.vectors.col(j).dot(out.vectors.col(k)) * out.vectors.col(j);
      out.vectors.col(k).normalize();
    }
    start = end;
  }
  return out;
}

/// Spectral (2-)norm of a symmetric matrix.
inline double symmetric_norm(const Eigen::MatrixXd& M) {
  const auto e = eigendecompose_symmetric(M);
  return std::max(std::abs(e.values[0]), std::abs(e.values[e.values.size() - 1]));
}

}  // namespace eqindex
