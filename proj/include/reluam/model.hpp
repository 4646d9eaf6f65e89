#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace reluam {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sample matrix (rows are samples) with its noiseless labels.
struct Dataset {
  Matrix X;
  Vector y;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
};

inline void validate(const Dataset& ds) {
  if (ds.y.size() != ds.X.rows())
    throw std::invalid_argument("Dataset: label count does not match sample count");
  if (!ds.X.allFinite() || !ds.y.allFinite())
    throw std::invalid_argument("Dataset: non-finite entries");
}

enum class Arch { SingleNeuron, OneHidden, Skipped, TwoHidden };

// Ground-truth network. W1 is d x k (d x 1 for a single neuron); W2 is only
// used by the two-hidden variant; `support` (0-based column indices into the
// d x d identity) only by the skipped variant.
struct TeacherNetwork {
  Arch arch = Arch::OneHidden;
  Matrix W1;
  Matrix W2;
  std::vector<int> support;

  int input_dim() const { return static_cast<int>(W1.rows()); }
  int hidden_dim() const { return static_cast<int>(W1.cols()); }
};

inline Vector relu(const Vector& v) { return v.cwiseMax(0.0); }

// Columns e_{S(q)} of the d x d identity, in support order.
inline Matrix identity_columns(const std::vector<int>& support, int d) {
  const int k = static_cast<int>(support.size());
  Matrix I_S = Matrix::Zero(d, k);
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  for (int q = 0; q < k; ++q) {
    const int idx = support[static_cast<std::size_t>(q)];
    if (idx < 0 || idx >= d)
      throw std::invalid_argument("support index out of range");
    if (seen[static_cast<std::size_t>(idx)])
      throw std::invalid_argument("support indices must be distinct");
    seen[static_cast<std::size_t>(idx)] = 1;
    I_S(idx, q) = 1.0;
  }
  return I_S;
}

// y_i = sum_q max(x_i . w_q, 0). The k = 1 column covers the single neuron.
inline Vector forward_one_hidden(const Matrix& X, const Matrix& W) {
  if (X.cols() != W.rows())
    throw std::invalid_argument("forward_one_hidden: X is " +
                                std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                                " but W has " + std::to_string(W.rows()) + " rows");
  return (X * W).cwiseMax(0.0).rowwise().sum();
}

// Skipped-connection model: effective weights are W + I_S.
inline Vector forward_skipped(const Matrix& X, const Matrix& W,
                              const std::vector<int>& support) {
  if (static_cast<Eigen::Index>(support.size()) != W.cols())
    throw std::invalid_argument("forward_skipped: |support| must equal the number of neurons");
  const Matrix I_S = identity_columns(support, static_cast<int>(X.cols()));
  return forward_one_hidden(X, W + I_S);
}

// y = relu(relu(X W1) W2) * 1.
inline Vector forward_two_hidden(const Matrix& X, const Matrix& W1, const Matrix& W2) {
  if (X.cols() != W1.rows() || W1.cols() != W2.rows())
    throw std::invalid_argument("forward_two_hidden: inner dimensions disagree");
  return ((X * W1).cwiseMax(0.0) * W2).cwiseMax(0.0).rowwise().sum();
}

// Weights of the forward map as seen by the one-hidden-layer machinery:
// the skipped variant folds the identity into W.
inline Matrix effective_weights(const TeacherNetwork& t) {
  if (t.arch == Arch::Skipped)
    return t.W1 + identity_columns(t.support, t.input_dim());
  return t.W1;
}

inline Vector forward(const TeacherNetwork& t, const Matrix& X) {
  switch (t.arch) {
    case Arch::SingleNeuron:
    case Arch::OneHidden:
      return forward_one_hidden(X, t.W1);
    case Arch::Skipped:
      return forward_skipped(X, t.W1, t.support);
    case Arch::TwoHidden:
      return forward_two_hidden(X, t.W1, t.W2);
  }
  throw std::logic_error("forward: unknown architecture");
}

inline void validate(const TeacherNetwork& t) {
  if (t.W1.size() == 0) throw std::invalid_argument("TeacherNetwork: empty W1");
  switch (t.arch) {
    case Arch::SingleNeuron:
      if (t.W1.cols() != 1)
        throw std::invalid_argument("TeacherNetwork: single neuron needs a d x 1 weight");
      break;
    case Arch::OneHidden:
      break;
    case Arch::Skipped:
      if (static_cast<Eigen::Index>(t.support.size()) != t.W1.cols())
        throw std::invalid_argument("TeacherNetwork: |support| must equal k");
      identity_columns(t.support, t.input_dim());  // range + distinctness
      break;
    case Arch::TwoHidden:
      if (t.W1.cols() != t.W2.rows())
        throw std::invalid_argument("TeacherNetwork: W1/W2 inner dimensions disagree");
      break;
  }
}

}  // namespace reluam
