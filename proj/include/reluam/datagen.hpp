#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "reluam/model.hpp"
#include "reluam/rng.hpp"

namespace reluam {

// n x d matrix with i.i.d. mean-zero Gaussian entries of the given variance.
// Entries are drawn in column-major order so the layout matches storage.
inline Matrix sample_gaussian_matrix(int n, int d, double variance, RngSeed seed) {
  if (n < 1 || d < 1)
    throw std::invalid_argument("sample_gaussian_matrix: dimensions must be positive");
  if (!(variance > 0.0))
    throw std::invalid_argument("sample_gaussian_matrix: variance must be positive");
  RandomStream rs(seed, rng_tag::kData,
                  {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d)});
  const double sigma = std::sqrt(variance);
  Matrix X(n, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = sigma * rs.gaussian();
  return X;
}

namespace detail {

// Thin Q factor of a Householder QR, with column signs fixed so the diagonal
// of R is nonnegative. Makes the factor unique for a given input.
inline Matrix orthonormal_factor(const Matrix& G) {
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(G.rows(), G.cols());
  const Matrix R = qr.matrixQR()
                       .topLeftCorner(G.cols(), G.cols())
                       .triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

inline Matrix gaussian_from_stream(RandomStream& rs, int rows, int cols) {
  Matrix G(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) G(i, j) = rs.gaussian();
  return G;
}

}  // namespace detail

// Teacher weights W* = U Sigma V^T with prescribed condition number kappa.
// U (d x k) and V (k x k) are orthonormal factors of independent Gaussian
// matrices; Sigma has entries 1, 1 + (kappa-1)/(k-1), ..., kappa.
inline Matrix make_conditioned_weights(int d, int k, double kappa, RngSeed seed) {
  if (k > d) throw std::invalid_argument("make_conditioned_weights: k must not exceed d");
  if (k < 1) throw std::invalid_argument("make_conditioned_weights: k must be positive");
  if (!(kappa >= 1.0))
    throw std::invalid_argument("make_conditioned_weights: kappa must be >= 1");
  RandomStream rs(seed, rng_tag::kWeights,
                  {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(k)});
  const Matrix U = detail::orthonormal_factor(detail::gaussian_from_stream(rs, d, k));
  const Matrix V = detail::orthonormal_factor(detail::gaussian_from_stream(rs, k, k));
  Vector sigma(k);
  for (int q = 0; q < k; ++q)
    sigma(q) = (k == 1) ? 1.0 : 1.0 + q * (kappa - 1.0) / (k - 1.0);
  return U * sigma.asDiagonal() * V.transpose();
}

// k distinct indices drawn uniformly without replacement from [0, d).
// Partial Fisher-Yates; the returned order is the draw order.
inline std::vector<int> random_support(int d, int k, RngSeed seed) {
  if (k > d) throw std::invalid_argument("random_support: k must not exceed d");
  if (k < 1) throw std::invalid_argument("random_support: k must be positive");
  RandomStream rs(seed, rng_tag::kSupport,
                  {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(k)});
  std::vector<int> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rs.uniform_below(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
  }
  return out;
}

// --- teacher constructions used by the experiments ---

// Single ReLU neuron with standard normal weights.
inline TeacherNetwork make_single_neuron_teacher(int d, RngSeed seed) {
  RandomStream rs(seed, rng_tag::kWeights, {static_cast<std::uint64_t>(d), 1});
  TeacherNetwork t;
  t.arch = Arch::SingleNeuron;
  t.W1 = detail::gaussian_from_stream(rs, d, 1);
  return t;
}

inline TeacherNetwork make_one_hidden_teacher(int d, int k, double kappa, RngSeed seed) {
  TeacherNetwork t;
  t.arch = Arch::OneHidden;
  t.W1 = make_conditioned_weights(d, k, kappa, seed);
  return t;
}

// Skipped-connection teacher: W* has entries gamma * N(0, 1/n) and a random
// size-k support, so the effective weights are W* + I_S.
inline TeacherNetwork make_skipped_teacher(int d, int k, double gamma, int n,
                                           RngSeed seed) {
  if (n < 1) throw std::invalid_argument("make_skipped_teacher: n must be positive");
  RandomStream rs(seed, rng_tag::kWeights,
                  {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(k), 2});
  TeacherNetwork t;
  t.arch = Arch::Skipped;
  t.W1 = (gamma / std::sqrt(static_cast<double>(n))) *
         detail::gaussian_from_stream(rs, d, k);
  t.support = random_support(d, k, seed);
  return t;
}

inline TeacherNetwork make_two_hidden_teacher(int d1, int d2, int d3, RngSeed seed) {
  RandomStream rs(seed, rng_tag::kWeights,
                  {static_cast<std::uint64_t>(d1), static_cast<std::uint64_t>(d2),
                   static_cast<std::uint64_t>(d3)});
  TeacherNetwork t;
  t.arch = Arch::TwoHidden;
  t.W1 = detail::gaussian_from_stream(rs, d1, d2);
  t.W2 = detail::gaussian_from_stream(rs, d2, d3);
  return t;
}

// X with i.i.d. N(0, 1/n) entries and exact noiseless labels from the teacher.
inline Dataset make_dataset(const TeacherNetwork& teacher, int n, RngSeed seed) {
  validate(teacher);
  Dataset ds;
  ds.X = sample_gaussian_matrix(n, teacher.input_dim(), 1.0 / n, seed);
  ds.y = forward(teacher, ds.X);
  return ds;
}

}  // namespace reluam
