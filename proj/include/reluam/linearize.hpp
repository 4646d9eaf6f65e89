#pragma once

#include <stdexcept>

#include "reluam/model.hpp"

namespace reluam {

// Per-neuron activation indicators: bits(i, q) = 1 iff x_i . w_q >= 0.
// Stored as 0.0/1.0 so diagonal masking is a plain elementwise product.
struct SignState {
  Matrix bits;

  int n() const { return static_cast<int>(bits.rows()); }
  int k() const { return static_cast<int>(bits.cols()); }
};

// Ties (x . w == 0) count as active; zero weights therefore activate
// everything, which is what makes the zero initialization well defined.
inline SignState estimate_signs(const Matrix& X, const Matrix& W) {
  if (X.cols() != W.rows())
    throw std::invalid_argument("estimate_signs: dimension mismatch");
  SignState s;
  s.bits = ((X * W).array() >= 0.0).cast<double>().matrix();
  return s;
}

inline int count_sign_flips(const SignState& a, const SignState& b) {
  if (a.bits.rows() != b.bits.rows() || a.bits.cols() != b.bits.cols())
    throw std::invalid_argument("count_sign_flips: shape mismatch");
  return static_cast<int>((a.bits.array() != b.bits.array()).count());
}

// [diag(p_1) X ... diag(p_k) X], the operator with B vec(W) = sigma(X W) 1
// for any W whose sign state equals `signs`. Column-stacked vec convention.
inline Matrix assemble_B(const Matrix& X, const SignState& signs) {
  if (signs.bits.rows() != X.rows())
    throw std::invalid_argument("assemble_B: sign state does not match X");
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const int k = signs.k();
  Matrix B(n, static_cast<Eigen::Index>(d) * k);
  for (int q = 0; q < k; ++q)
    B.middleCols(static_cast<Eigen::Index>(q) * d, d) =
        X.array().colwise() * signs.bits.col(q).array();
  return B;
}

// Masked hidden activations: column q is diag(p1_q) X w1_q. Equals
// sigma(X W1) when the signs were estimated from W1 itself.
inline Matrix hidden_map(const Matrix& X, const Matrix& W1, const SignState& signs1) {
  if (X.cols() != W1.rows())
    throw std::invalid_argument("hidden_map: dimension mismatch");
  if (signs1.bits.rows() != X.rows() || signs1.bits.cols() != W1.cols())
    throw std::invalid_argument("hidden_map: sign state shape mismatch");
  return ((X * W1).array() * signs1.bits.array()).matrix();
}

// Operator for the first-layer update of the two-hidden-layer scheme:
// block q = sum_r W2(q, r) diag(p2_r) diag(p1_q) X, concatenated over q.
inline Matrix assemble_C(const Matrix& X, const SignState& signs1,
                         const SignState& signs2, const Matrix& W2) {
  const int n = static_cast<int>(X.rows());
  const int d1 = static_cast<int>(X.cols());
  const int d2 = static_cast<int>(W2.rows());
  const int d3 = static_cast<int>(W2.cols());
  if (signs1.bits.rows() != n || signs1.bits.cols() != d2)
    throw std::invalid_argument("assemble_C: signs1 shape mismatch");
  if (signs2.bits.rows() != n || signs2.bits.cols() != d3)
    throw std::invalid_argument("assemble_C: signs2 shape mismatch");
  Matrix C(n, static_cast<Eigen::Index>(d1) * d2);
  for (int q = 0; q < d2; ++q) {
    // sum_r W2(q,r) p2_r, folded with p1_q into one row scaling
    Vector scale = (signs2.bits * W2.row(q).transpose()).cwiseProduct(signs1.bits.col(q));
    C.middleCols(static_cast<Eigen::Index>(q) * d1, d1) =
        X.array().colwise() * scale.array();
  }
  return C;
}

// Operator for the second-layer update: block r = diag(p2_r) H.
inline Matrix assemble_B2(const Matrix& H, const SignState& signs2) {
  if (signs2.bits.rows() != H.rows())
    throw std::invalid_argument("assemble_B2: sign state does not match H");
  const int n = static_cast<int>(H.rows());
  const int d2 = static_cast<int>(H.cols());
  const int d3 = signs2.k();
  Matrix B2(n, static_cast<Eigen::Index>(d2) * d3);
  for (int r = 0; r < d3; ++r)
    B2.middleCols(static_cast<Eigen::Index>(r) * d2, d2) =
        H.array().colwise() * signs2.bits.col(r).array();
  return B2;
}

}  // namespace reluam
