#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "reluam/datagen.hpp"
#include "reluam/model.hpp"
#include "reluam/rng.hpp"

namespace reluam {

enum class PerturbNorm { Frobenius, Spectral };

inline Matrix init_zero(int d, int k) { return Matrix::Zero(d, k); }

// W0 = W* + E with E a Gaussian direction rescaled so that the chosen norm of
// E is exactly delta times the same norm of W*.
inline Matrix init_perturbed(const Matrix& Wstar, double delta, RngSeed seed,
                             PerturbNorm norm = PerturbNorm::Frobenius) {
  if (delta < 0.0 || delta >= 1.0)
    throw std::invalid_argument("init_perturbed: delta must lie in [0, 1)");
  if (delta == 0.0) return Wstar;
  const double ref = norm == PerturbNorm::Frobenius
                         ? Wstar.norm()
                         : Wstar.operatorNorm();
  if (ref == 0.0)
    throw std::invalid_argument("init_perturbed: zero reference weights with delta > 0");
  RandomStream rs(seed, rng_tag::kInit,
                  {1, static_cast<std::uint64_t>(Wstar.rows()),
                   static_cast<std::uint64_t>(Wstar.cols())});
  Matrix E = detail::gaussian_from_stream(rs, static_cast<int>(Wstar.rows()),
                                          static_cast<int>(Wstar.cols()));
  const double e_norm =
      norm == PerturbNorm::Frobenius ? E.norm() : E.operatorNorm();
  if (e_norm == 0.0) throw std::runtime_error("init_perturbed: degenerate direction");
  return Wstar + (delta * ref / e_norm) * E;
}

// Entries i.i.d. scale * N(0, 1).
inline Matrix init_scaled_random(int d, int k, double scale, RngSeed seed) {
  if (!(scale > 0.0))
    throw std::invalid_argument("init_scaled_random: scale must be positive");
  RandomStream rs(seed, rng_tag::kInit,
                  {2, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(k)});
  return scale * detail::gaussian_from_stream(rs, d, k);
}

// Identity initialization for the skipped architecture: column q is e_{S(q)},
// so the initial distance to the effective teacher W* + I_S is ||W*||_F.
inline Matrix init_identity_skipped(const std::vector<int>& support, int d) {
  return identity_columns(support, d);
}

// Spectral initialization for one-hidden-layer networks. Builds the moment
// matrix P = sum_i y_i (x_i x_i^T - I), shifts it both ways into
// P1 = C I + P and P2 = C I - P with C = c_mult * ||P||_2, pools the top-k
// eigenpairs of each ranked by deviation |eig - C|, and orthogonalizes the
// pooled eigenvectors in that order, discarding near-dependent candidates.
// Returns a d x k matrix with orthonormal columns spanning (approximately)
// the span of the teacher weights; per-neuron norms are not recovered.
inline Matrix init_tensor(const Matrix& X, const Vector& y, int k,
                          double c_mult = 3.0) {
  const int d = static_cast<int>(X.cols());
  if (k > d) throw std::invalid_argument("init_tensor: k must not exceed d");
  if (k < 1) throw std::invalid_argument("init_tensor: k must be positive");
  if (!(c_mult > 2.0))
    throw std::invalid_argument("init_tensor: the shift multiplier must exceed 2");
  if (X.rows() != y.size())
    throw std::invalid_argument("init_tensor: X and y disagree on n");

  Matrix P = X.transpose() * y.asDiagonal() * X - y.sum() * Matrix::Identity(d, d);
  P = 0.5 * (P + P.transpose());  // symmetrize away rounding dust

  Eigen::SelfAdjointEigenSolver<Matrix> es_p(P);
  if (es_p.info() != Eigen::Success)
    throw std::runtime_error("init_tensor: eigendecomposition failed");
  const double shift = c_mult * es_p.eigenvalues().cwiseAbs().maxCoeff();

  struct Candidate {
    double deviation;
    Vector vec;
  };
  std::vector<Candidate> pool;
  auto harvest = [&](const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("init_tensor: eigendecomposition failed");
    // top-k by |eigenvalue|; eigenvalues are ascending
    std::vector<int> order(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    for (int i = 0; i < k; ++i) {
      const int idx = order[static_cast<std::size_t>(i)];
      Vector v = es.eigenvectors().col(idx);
      Eigen::Index imax;
      v.cwiseAbs().maxCoeff(&imax);
      if (v(imax) < 0.0) v = -v;  // deterministic sign
      pool.push_back({std::abs(es.eigenvalues()(idx) - shift), std::move(v)});
    }
  };
  harvest(shift * Matrix::Identity(d, d) + P);
  harvest(shift * Matrix::Identity(d, d) - P);

  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    return a.deviation > b.deviation;
  });

  // Gram-Schmidt over the pooled candidates; the twin copy of an eigenvector
  // that survives in both shifted matrices projects to ~0 and is skipped.
  Matrix W0(d, k);
  int taken = 0;
  for (const Candidate& cand : pool) {
    if (taken == k) break;
    Vector v = cand.vec;
    for (int j = 0; j < taken; ++j) v -= W0.col(j).dot(v) * W0.col(j);
    const double nrm = v.norm();
    if (nrm < 1e-8) continue;
    W0.col(taken++) = v / nrm;
  }
  if (taken < k)
    throw std::runtime_error("init_tensor: candidate pool did not span k directions");
  return W0;
}

}  // namespace reluam
