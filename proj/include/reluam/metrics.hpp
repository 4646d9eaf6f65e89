#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "reluam/lsq.hpp"
#include "reluam/model.hpp"

namespace reluam {

namespace detail {

// Hungarian method (Kuhn-Munkres with potentials, O(k^3)) for the square
// min-cost assignment problem. Returns a permutation p with row i assigned
// to column p[i].
inline std::vector<int> hungarian_min_assign(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("hungarian: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) result[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return result;
}

inline Matrix pairwise_sq_column_dist(const Matrix& W, const Matrix& Wref) {
  const int k = static_cast<int>(W.cols());
  Matrix cost(k, k);
  for (int q = 0; q < k; ++q)
    for (int r = 0; r < k; ++r) cost(q, r) = (W.col(q) - Wref.col(r)).squaredNorm();
  return cost;
}

}  // namespace detail

// Permutation pi minimizing sum_q ||w_q - wref_{pi(q)}||^2. Because the
// squared Frobenius distance decomposes over columns, this is exactly the
// minimum over all column permutations of ||W - Wref_pi||_F.
inline std::vector<int> perm_match(const Matrix& W, const Matrix& Wref) {
  if (W.rows() != Wref.rows() || W.cols() != Wref.cols())
    throw std::invalid_argument("perm_match: shape mismatch");
  return detail::hungarian_min_assign(detail::pairwise_sq_column_dist(W, Wref));
}

// min over column permutations of ||W - Wref_pi||_F.
inline double perm_dist(const Matrix& W, const Matrix& Wref) {
  const std::vector<int> pi = perm_match(W, Wref);
  double sq = 0.0;
  for (int q = 0; q < static_cast<int>(W.cols()); ++q)
    sq += (W.col(q) - Wref.col(static_cast<Eigen::Index>(pi[static_cast<std::size_t>(q)])))
              .squaredNorm();
  return std::sqrt(sq);
}

struct RecoveryReport {
  std::vector<int> permutation;
  double dist = 0.0;
  double relative_error = 0.0;
  bool success = false;
};

// Success iff the permutation-matched relative Frobenius error is strictly
// below the threshold.
inline RecoveryReport recovery_success(const Matrix& W, const Matrix& Wref,
                                       double threshold = 0.01) {
  const double ref_norm = Wref.norm();
  if (ref_norm == 0.0)
    throw std::invalid_argument("recovery_success: reference weights are zero");
  RecoveryReport rep;
  rep.permutation = perm_match(W, Wref);
  double sq = 0.0;
  for (int q = 0; q < static_cast<int>(W.cols()); ++q)
    sq += (W.col(q) -
           Wref.col(static_cast<Eigen::Index>(rep.permutation[static_cast<std::size_t>(q)])))
              .squaredNorm();
  rep.dist = std::sqrt(sq);
  rep.relative_error = rep.dist / ref_norm;
  rep.success = rep.relative_error < threshold;
  return rep;
}

// Condition numbers of a full-column-rank weight matrix:
// kappa = sigma_1 / sigma_k, lambda = (prod_q sigma_q) / sigma_k^k.
inline std::pair<double, double> condition_stats(const Matrix& W) {
  Eigen::BDCSVD<Matrix> svd(W);
  const Vector& sv = svd.singularValues();
  const int k = static_cast<int>(sv.size());
  const double tol = default_rank_tolerance(W.rows(), W.cols(), sv(0));
  if (sv(k - 1) <= tol)
    throw std::domain_error("condition_stats: rank-deficient weights");
  const double kappa = sv(0) / sv(k - 1);
  double lambda = 1.0;
  for (int q = 0; q < k; ++q) lambda *= sv(q) / sv(k - 1);
  return {kappa, lambda};
}

// Largest principal angle (radians) between the column spans of two
// full-column-rank d x k matrices.
inline double subspace_angle(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("subspace_angle: shape mismatch");
  if (A.cols() > A.rows())
    throw std::invalid_argument("subspace_angle: need k <= d");
  auto basis = [](const Matrix& M) {
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    const double tol = default_rank_tolerance(M.rows(), M.cols(), sv(0));
    if (sv(sv.size() - 1) <= tol)
      throw std::domain_error("subspace_angle: rank-deficient input");
    return Matrix(svd.matrixU());
  };
  const Matrix Qa = basis(A);
  const Matrix Qb = basis(B);
  Eigen::BDCSVD<Matrix> svd(Qa.transpose() * Qb);
  const double smin =
      std::min(1.0, std::max(-1.0, svd.singularValues().minCoeff()));
  return std::acos(smin);
}

}  // namespace reluam
