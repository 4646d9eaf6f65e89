#pragma once

#include <chrono>
#include <stdexcept>
#include <utility>

#include "reluam/altmin.hpp"
#include "reluam/linearize.hpp"
#include "reluam/model.hpp"

namespace reluam {

struct GdParams {
  double eta = 0.1;
  int max_iterations = 200;
  double early_stop_tol = 1e-12;
  bool record_trace = false;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// l2-squared training loss.
inline double loss(const Matrix& X, const Vector& y, const Matrix& W) {
  return (forward_one_hidden(X, W) - y).squaredNorm();
}

// Gradient of the loss: column q is 2 X^T (1{X w_q >= 0} o r) with
// r = sigma(X W) 1 - y. The subgradient at kinks follows the same >= 0
// indicator as the sign estimation.
inline Matrix grad_one_hidden(const Matrix& X, const Vector& y, const Matrix& W) {
  const Vector r = forward_one_hidden(X, W) - y;
  const SignState signs = estimate_signs(X, W);
  return 2.0 * X.transpose() *
         (signs.bits.array().colwise() * r.array()).matrix();
}

// Constant-step-size gradient descent with the same stopping rules and trace
// schema as the alternating-minimization drivers. Throws DivergenceError when
// the loss exceeds 1e6 times its initial value.
inline std::pair<Matrix, ConvergenceTrace> train_gd(const Matrix& X, const Vector& y,
                                                    const Matrix& W0,
                                                    const GdParams& params,
                                                    const Matrix* teacher = nullptr) {
  if (!(params.eta > 0.0)) throw std::invalid_argument("train_gd: eta must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const double y_norm = y.norm();
  const double initial_loss = loss(X, y, W0);
  const double blowup = 1e6 * std::max(initial_loss, 1e-300);

  Matrix W = W0;
  ConvergenceTrace trace;
  std::optional<SignState> prev_signs;
  for (int t = 0; t < params.max_iterations; ++t) {
    const SignState signs = estimate_signs(X, W);
    const int flips = prev_signs ? count_sign_flips(signs, *prev_signs) : 0;
    const Matrix W_next = W - params.eta * grad_one_hidden(X, y, W);
    const double res = (forward_one_hidden(X, W_next) - y).norm();
    if (res * res > blowup)
      throw DivergenceError("train_gd: loss exceeded 1e6x its initial value");

    if (params.record_trace) {
      TraceRecord rec;
      rec.iteration = t + 1;
      rec.residual = res;
      rec.param_dist = teacher ? perm_dist(W_next, *teacher) : -1.0;
      rec.sign_flips = flips;
      rec.wall_time = detail::seconds_since(t0);
      trace.records.push_back(rec);
    }

    const bool stop = detail::should_stop(W, W_next, res, y_norm, params.early_stop_tol);
    W = W_next;
    prev_signs = signs;
    trace.completed_iterations = t + 1;
    if (stop) break;
  }
  return {std::move(W), std::move(trace)};
}

}  // namespace reluam
