#pragma once

#include <chrono>
#include <optional>
#include <utility>
#include <vector>

#include "reluam/linearize.hpp"
#include "reluam/lsq.hpp"
#include "reluam/metrics.hpp"
#include "reluam/model.hpp"

namespace reluam {

struct AmParams {
  int max_iterations = 50;
  double early_stop_tol = 1e-12;  // on the relative Frobenius change of W
  bool record_trace = false;
  double rank_tol = -1.0;  // forwarded to the least-squares solver
};

struct TraceRecord {
  int iteration = 0;       // 1-based, after the update
  double residual = 0.0;   // ||f(X) - y||
  double param_dist = -1.0;  // permutation-matched distance to the teacher, -1 if unknown
  int sign_flips = 0;      // activation bits changed vs the previous iteration
  double wall_time = 0.0;  // seconds since training started
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;  // one per completed iteration when recording
  int completed_iterations = 0;      // counted even when recording is off
};

namespace detail {

inline bool should_stop(const Matrix& W_prev, const Matrix& W_next, double res,
                        double y_norm, double tol) {
  if (res < 1e-12 * y_norm) return true;
  const double denom = W_prev.norm();
  const double change = (W_next - W_prev).norm();
  if (denom == 0.0) return change == 0.0;
  return change / denom <= tol;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// One alternation of the one-hidden-layer scheme: estimate signs at W, build
// the linearized operator, solve the least-squares problem, reshape.
inline Matrix am_step_one_hidden(const Matrix& X, const Vector& y, const Matrix& W,
                                 double rank_tol = -1.0) {
  const SignState signs = estimate_signs(X, W);
  const Matrix B = assemble_B(X, signs);
  const LsqSolution sol = solve_min_norm_lsq(B, y, rank_tol);
  return Eigen::Map<const Matrix>(sol.x.data(), W.rows(), W.cols());
}

// Alternating minimization for y = sigma(X W) 1. Runs up to
// params.max_iterations alternations, stopping early when the relative
// Frobenius change of W drops to params.early_stop_tol or the residual
// reaches 1e-12 ||y||. `teacher` only feeds the trace distance column.
inline std::pair<Matrix, ConvergenceTrace> train_one_hidden(
    const Matrix& X, const Vector& y, const Matrix& W0, const AmParams& params,
    const Matrix* teacher = nullptr) {
  if (params.max_iterations < 1)
    throw std::invalid_argument("train_one_hidden: need at least one iteration");
  const auto t0 = std::chrono::steady_clock::now();
  const double y_norm = y.norm();

  Matrix W = W0;
  ConvergenceTrace trace;
  std::optional<SignState> prev_signs;
  for (int t = 0; t < params.max_iterations; ++t) {
    const SignState signs = estimate_signs(X, W);
    const int flips = prev_signs ? count_sign_flips(signs, *prev_signs) : 0;
    const Matrix B = assemble_B(X, signs);
    const LsqSolution sol = solve_min_norm_lsq(B, y, params.rank_tol);
    const Matrix W_next = Eigen::Map<const Matrix>(sol.x.data(), W.rows(), W.cols());
    const double res = (forward_one_hidden(X, W_next) - y).norm();

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

// Skipped-connection training learns the effective weights What = W + I_S
// directly; the default start is the identity initialization What0 = I_S.
inline std::pair<Matrix, ConvergenceTrace> train_skipped(
    const Matrix& X, const Vector& y, const std::vector<int>& support,
    const AmParams& params, const Matrix* effective_teacher = nullptr,
    const Matrix* What0 = nullptr) {
  const Matrix start = What0 ? *What0
                             : identity_columns(support, static_cast<int>(X.cols()));
  if (static_cast<std::size_t>(start.cols()) != support.size())
    throw std::invalid_argument("train_skipped: initialization width != |support|");
  return train_one_hidden(X, y, start, params, effective_teacher);
}

// Alternating minimization for y = sigma(sigma(X W1) W2) 1. Per iteration the
// signs of both layers are estimated once, W1 is updated through the operator
// C, and W2 is then updated through B2 built from the fresh W1 (Gauss-Seidel
// sweep, signs held fixed within the iteration).
struct TwoHiddenResult {
  Matrix W1;
  Matrix W2;
  ConvergenceTrace trace;
};

inline TwoHiddenResult train_two_hidden(const Matrix& X, const Vector& y,
                                        const Matrix& W1_0, const Matrix& W2_0,
                                        const AmParams& params,
                                        const Matrix* teacher_W1 = nullptr,
                                        const Matrix* teacher_W2 = nullptr) {
  if (X.cols() != W1_0.rows() || W1_0.cols() != W2_0.rows())
    throw std::invalid_argument("train_two_hidden: dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  const double y_norm = y.norm();
  const int d1 = static_cast<int>(W1_0.rows());
  const int d2 = static_cast<int>(W1_0.cols());
  const int d3 = static_cast<int>(W2_0.cols());

  Matrix W1 = W1_0, W2 = W2_0;
  ConvergenceTrace trace;
  std::optional<SignState> prev1, prev2;
  for (int t = 0; t < params.max_iterations; ++t) {
    const SignState signs1 = estimate_signs(X, W1);
    const SignState signs2 = estimate_signs((X * W1).cwiseMax(0.0), W2);
    const int flips = (prev1 ? count_sign_flips(signs1, *prev1) : 0) +
                      (prev2 ? count_sign_flips(signs2, *prev2) : 0);

    const Matrix C = assemble_C(X, signs1, signs2, W2);
    const LsqSolution sol1 = solve_min_norm_lsq(C, y, params.rank_tol);
    const Matrix W1_next = Eigen::Map<const Matrix>(sol1.x.data(), d1, d2);

    const Matrix H = hidden_map(X, W1_next, signs1);
    const Matrix B2 = assemble_B2(H, signs2);
    const LsqSolution sol2 = solve_min_norm_lsq(B2, y, params.rank_tol);
    const Matrix W2_next = Eigen::Map<const Matrix>(sol2.x.data(), d2, d3);

    const double res = (forward_two_hidden(X, W1_next, W2_next) - y).norm();
    if (params.record_trace) {
      TraceRecord rec;
      rec.iteration = t + 1;
      rec.residual = res;
      if (teacher_W1 && teacher_W2) {
        // joint distance: match hidden neurons on W1 columns, then outer
        // columns; diagnostic only (inter-layer rescaling is not a metric
        // symmetry the trace tries to quotient out)
        const std::vector<int> pi = perm_match(W1_next, *teacher_W1);
        double sq = 0.0;
        for (int q = 0; q < d2; ++q)
          sq += (W1_next.col(q) - teacher_W1->col(pi[static_cast<std::size_t>(q)]))
                    .squaredNorm();
        Matrix W2_perm(d2, d3);
        for (int q = 0; q < d2; ++q)
          W2_perm.row(pi[static_cast<std::size_t>(q)]) = W2_next.row(q);
        const std::vector<int> pi2 =
            perm_match(W2_perm.transpose(), teacher_W2->transpose());
        for (int r = 0; r < d3; ++r)
          sq += (W2_perm.col(r) - teacher_W2->col(pi2[static_cast<std::size_t>(r)]))
                    .squaredNorm();
        rec.param_dist = std::sqrt(sq);
      }
      rec.sign_flips = flips;
      rec.wall_time = detail::seconds_since(t0);
      trace.records.push_back(rec);
    }

    const bool stop =
        res < 1e-12 * y_norm ||
        ((W1_next - W1).norm() + (W2_next - W2).norm()) <=
            params.early_stop_tol * std::max(W1.norm() + W2.norm(), 1e-300);
    W1 = W1_next;
    W2 = W2_next;
    prev1 = signs1;
    prev2 = signs2;
    trace.completed_iterations = t + 1;
    if (stop) break;
  }
  return {std::move(W1), std::move(W2), std::move(trace)};
}

}  // namespace reluam
