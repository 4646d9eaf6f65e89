#pragma once

#include <Eigen/SVD>
#include <limits>
#include <stdexcept>

#include "reluam/model.hpp"

namespace reluam {

struct LsqSolution {
  Vector x;
  double residual_norm = 0.0;  // ||A x - b||, recomputed from the inputs
  int effective_rank = 0;
};

inline double residual(const Matrix& A, const Vector& x, const Vector& b) {
  if (A.cols() != x.size() || A.rows() != b.size())
    throw std::invalid_argument("residual: shape mismatch");
  return (A * x - b).norm();
}

// Default numerical-rank tolerance: max(m, p) * sigma_max * machine epsilon.
inline double default_rank_tolerance(Eigen::Index m, Eigen::Index p, double sigma_max) {
  return static_cast<double>(std::max(m, p)) * sigma_max *
         std::numeric_limits<double>::epsilon();
}

// Minimum-norm least-squares solution via SVD with explicit rank truncation.
// Rank-deficient systems (e.g. a dead neuron zeroing a whole block of B) get
// the pseudo-inverse solution, which puts zero weight on the null space.
// `rank_tol` < 0 selects the default tolerance above.
inline LsqSolution solve_min_norm_lsq(const Matrix& A, const Vector& b,
                                      double rank_tol = -1.0) {
  if (A.rows() != b.size())
    throw std::invalid_argument("solve_min_norm_lsq: A and b disagree on m");
  if (A.rows() < 1 || A.cols() < 1)
    throw std::invalid_argument("solve_min_norm_lsq: empty system");
  if (!A.allFinite() || !b.allFinite())
    throw std::invalid_argument("solve_min_norm_lsq: non-finite entries");

  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double tol = rank_tol >= 0.0 ? rank_tol : default_rank_tolerance(A.rows(), A.cols(), smax);

  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;

  LsqSolution sol;
  sol.effective_rank = rank;
  if (rank == 0) {
    sol.x = Vector::Zero(A.cols());
  } else {
    const Vector c = svd.matrixU().leftCols(rank).transpose() * b;
    sol.x = svd.matrixV().leftCols(rank) *
            (c.array() / sv.head(rank).array()).matrix();
  }
  sol.residual_norm = residual(A, sol.x, b);
  return sol;
}

}  // namespace reluam
