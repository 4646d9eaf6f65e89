#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "reluam/altmin.hpp"
#include "reluam/datagen.hpp"
#include "reluam/gd.hpp"
#include "reluam/init.hpp"
#include "reluam/metrics.hpp"

namespace reluam {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind {
  SingleNeuronPhase,
  OneHiddenPhase,
  LossCurve,
  SkippedPhase,
  TwoHiddenPhase,
  TwoHiddenLoss,
};

enum class Algo { AM, GD };

enum class InitKind { Zero, PerturbedTruth, ScaledRandom, IdentitySkipped, Tensor };

struct InitSpec {
  InitKind kind = InitKind::PerturbedTruth;
  double delta = 0.9;   // PerturbedTruth
  double scale = 1e-4;  // ScaledRandom
  double c_mult = 3.0;  // Tensor
};

struct GridPoint {
  int d = 0;
  int k = 0;
  int ko = 0;
  int n = 0;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::OneHiddenPhase;
  Arch arch = Arch::OneHidden;
  Algo algo = Algo::AM;
  InitSpec init;
  std::vector<int> d_values{20};
  std::vector<int> k_values{5};
  std::vector<int> ko_values{2};
  std::vector<int> n_values{1000};
  int trials = 50;
  int T = 0;  // 0 selects the per-kind default
  double eta = -1.0;
  double threshold = 0.01;
  double gamma = 3.0;
  double kappa = 1.8;
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 selects the hardware concurrency
  double rank_tol = -1.0;
  std::string out;
  std::string config_file;
  std::vector<std::string> overridden_keys;  // config keys shadowed by flags
  bool single_run = false;                   // `train` subcommand
};

struct TrialResult {
  GridPoint point;
  int trial = 0;
  bool success = false;
  double relative_error = 0.0;
  int iterations_used = 0;
  double wall_time = 0.0;
  ConvergenceTrace trace;
};

struct PointSummary {
  GridPoint point;
  int trials = 0;
  int successes = 0;
};

struct ExperimentResults {
  ExperimentSpec spec;
  std::vector<TrialResult> trials;     // grid-major, trial-minor
  std::vector<PointSummary> summary;   // one entry per grid point
};

// --- string maps ---------------------------------------------------------

inline std::string to_string(Arch a) {
  switch (a) {
    case Arch::SingleNeuron: return "single";
    case Arch::OneHidden: return "onehidden";
    case Arch::Skipped: return "skipped";
    case Arch::TwoHidden: return "twohidden";
  }
  return "?";
}

inline std::string to_string(Algo a) { return a == Algo::AM ? "am" : "gd"; }

inline std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::Zero: return "zero";
    case InitKind::PerturbedTruth: return "perturbed";
    case InitKind::ScaledRandom: return "random";
    case InitKind::IdentitySkipped: return "identity";
    case InitKind::Tensor: return "tensor";
  }
  return "?";
}

inline Arch arch_from_string(const std::string& s) {
  if (s == "single") return Arch::SingleNeuron;
  if (s == "onehidden") return Arch::OneHidden;
  if (s == "skipped") return Arch::Skipped;
  if (s == "twohidden") return Arch::TwoHidden;
  throw std::invalid_argument("unknown arch '" + s + "'");
}

inline Algo algo_from_string(const std::string& s) {
  if (s == "am") return Algo::AM;
  if (s == "gd") return Algo::GD;
  throw std::invalid_argument("unknown algo '" + s + "'");
}

inline InitKind init_from_string(const std::string& s) {
  if (s == "zero") return InitKind::Zero;
  if (s == "perturbed") return InitKind::PerturbedTruth;
  if (s == "random") return InitKind::ScaledRandom;
  if (s == "identity") return InitKind::IdentitySkipped;
  if (s == "tensor") return InitKind::Tensor;
  throw std::invalid_argument("unknown init '" + s + "'");
}

inline bool is_loss_kind(ExperimentKind k) {
  return k == ExperimentKind::LossCurve || k == ExperimentKind::TwoHiddenLoss;
}

// --- defaults and validation ---------------------------------------------

// Iteration budgets tuned to the experiment families: 50 alternations for
// phase sweeps, 10 for the two-hidden runs, 200 for loss curves, and a
// larger budget for gradient-descent phase sweeps, which converge slowly.
inline int resolve_T(const ExperimentSpec& spec) {
  if (spec.T > 0) return spec.T;
  if (spec.arch == Arch::TwoHidden) return 10;
  if (spec.algo == Algo::GD) return is_loss_kind(spec.kind) ? 200 : 1000;
  return is_loss_kind(spec.kind) ? 200 : 50;
}

inline std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> grid;
  const bool two_hidden = spec.arch == Arch::TwoHidden;
  const std::vector<int> ks = spec.arch == Arch::SingleNeuron ? std::vector<int>{1}
                                                              : spec.k_values;
  const std::vector<int> kos = two_hidden ? spec.ko_values : std::vector<int>{0};
  for (int d : spec.d_values)
    for (int k : ks)
      for (int ko : kos)
        for (int n : spec.n_values) grid.push_back({d, k, ko, n});
  return grid;
}

inline void validate_spec(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("spec: trials must be >= 1");
  if (spec.T < 0) throw std::invalid_argument("spec: T must be positive");
  if (!(spec.threshold > 0.0)) throw std::invalid_argument("spec: threshold must be positive");
  if (spec.algo == Algo::GD) {
    if (!(spec.eta > 0.0))
      throw std::invalid_argument("spec: gd runs require --eta > 0");
    if (spec.arch == Arch::TwoHidden)
      throw std::invalid_argument("spec: gd is only implemented for one-hidden-layer architectures");
  }
  const std::vector<GridPoint> grid = expand_grid(spec);
  if (grid.empty()) throw std::invalid_argument("spec: empty grid");
  for (const GridPoint& p : grid) {
    if (p.d < 1 || p.k < 1 || p.n < 1 || (spec.arch == Arch::TwoHidden && p.ko < 1))
      throw std::invalid_argument("spec: degenerate grid point (d=" + std::to_string(p.d) +
                                  ", k=" + std::to_string(p.k) + ", k_o=" + std::to_string(p.ko) +
                                  ", n=" + std::to_string(p.n) + ")");
    if ((spec.arch == Arch::Skipped || spec.arch == Arch::OneHidden) && p.k > p.d)
      throw std::invalid_argument("spec: k must not exceed d at grid point d=" +
                                  std::to_string(p.d) + ", k=" + std::to_string(p.k));
  }
  switch (spec.init.kind) {
    case InitKind::IdentitySkipped:
      if (spec.arch != Arch::Skipped)
        throw std::invalid_argument("spec: identity init requires --arch skipped");
      break;
    case InitKind::Tensor:
      if (spec.arch != Arch::OneHidden && spec.arch != Arch::SingleNeuron)
        throw std::invalid_argument("spec: tensor init requires a dense 1-hidden architecture");
      if (!(spec.init.c_mult > 2.0))
        throw std::invalid_argument("spec: tensor init needs cmult > 2");
      break;
    case InitKind::PerturbedTruth:
      if (spec.init.delta < 0.0 || spec.init.delta >= 1.0)
        throw std::invalid_argument("spec: delta must lie in [0, 1)");
      break;
    case InitKind::ScaledRandom:
      if (!(spec.init.scale > 0.0))
        throw std::invalid_argument("spec: scale must be positive");
      break;
    case InitKind::Zero:
      break;
  }
}

// --- the trial itself -----------------------------------------------------

namespace detail {

inline std::uint64_t kind_id(ExperimentKind k) { return static_cast<std::uint64_t>(k) + 1; }

inline Matrix one_hidden_init(const ExperimentSpec& spec, const GridPoint& pt,
                              const TeacherNetwork& teacher, const Dataset& ds,
                              RngSeed rs) {
  const Matrix Wref = effective_weights(teacher);
  switch (spec.init.kind) {
    case InitKind::Zero:
      return init_zero(pt.d, pt.k);
    case InitKind::PerturbedTruth:
      return init_perturbed(Wref, spec.init.delta, rs, PerturbNorm::Frobenius);
    case InitKind::ScaledRandom:
      return init_scaled_random(pt.d, pt.k, spec.init.scale, rs);
    case InitKind::IdentitySkipped:
      return init_identity_skipped(teacher.support, pt.d);
    case InitKind::Tensor:
      return init_tensor(ds.X, ds.y, pt.k, spec.init.c_mult);
  }
  throw std::logic_error("unknown init kind");
}

}  // namespace detail

// Runs one fully deterministic trial: the substream is derived from
// (root seed, experiment kind, grid point, trial index), the teacher and the
// data are drawn from it, and the configured algorithm is scored.
inline TrialResult run_trial(const ExperimentSpec& spec, const GridPoint& pt, int trial) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t point_root =
      mix_seed(spec.seed, {detail::kind_id(spec.kind), static_cast<std::uint64_t>(pt.d),
                           static_cast<std::uint64_t>(pt.k), static_cast<std::uint64_t>(pt.ko),
                           static_cast<std::uint64_t>(pt.n)});
  const RngSeed rs{point_root, static_cast<std::uint64_t>(trial)};

  TrialResult result;
  result.point = pt;
  result.trial = trial;

  const bool record = is_loss_kind(spec.kind) || spec.single_run;
  const int T = resolve_T(spec);

  if (spec.arch == Arch::TwoHidden) {
    const TeacherNetwork teacher = make_two_hidden_teacher(pt.d, pt.k, pt.ko, rs);
    const Dataset ds = make_dataset(teacher, pt.n, rs);
    const RngSeed rs2{mix_seed(point_root, {0x4c32ull}), rs.trial};
    Matrix W1_0, W2_0;
    switch (spec.init.kind) {
      case InitKind::PerturbedTruth:
        W1_0 = init_perturbed(teacher.W1, spec.init.delta, rs, PerturbNorm::Spectral);
        W2_0 = init_perturbed(teacher.W2, spec.init.delta, rs2, PerturbNorm::Spectral);
        break;
      case InitKind::ScaledRandom:
        W1_0 = init_scaled_random(pt.d, pt.k, spec.init.scale, rs);
        W2_0 = init_scaled_random(pt.k, pt.ko, spec.init.scale, rs2);
        break;
      default:
        throw std::invalid_argument("two-hidden runs support perturbed or random init");
    }
    AmParams params;
    params.max_iterations = T;
    params.record_trace = record;
    params.rank_tol = spec.rank_tol;
    TwoHiddenResult r =
        train_two_hidden(ds.X, ds.y, W1_0, W2_0, params, &teacher.W1, &teacher.W2);
    // Per-neuron rescaling between the layers preserves the network map, so
    // two-hidden trials are scored on the training residual.
    const double rel = (forward_two_hidden(ds.X, r.W1, r.W2) - ds.y).norm() /
                       std::max(ds.y.norm(), 1e-300);
    result.relative_error = rel;
    result.success = rel < spec.threshold;
    result.iterations_used = r.trace.completed_iterations;
    result.trace = std::move(r.trace);
  } else {
    TeacherNetwork teacher;
    switch (spec.arch) {
      case Arch::SingleNeuron:
        teacher = make_single_neuron_teacher(pt.d, rs);
        break;
      case Arch::OneHidden:
        teacher = make_one_hidden_teacher(pt.d, pt.k, spec.kappa, rs);
        break;
      case Arch::Skipped:
        teacher = make_skipped_teacher(pt.d, pt.k, spec.gamma, pt.n, rs);
        break;
      default:
        break;
    }
    const Dataset ds = make_dataset(teacher, pt.n, rs);
    const Matrix Wref = effective_weights(teacher);
    const Matrix W0 = detail::one_hidden_init(spec, pt, teacher, ds, rs);

    Matrix W;
    ConvergenceTrace trace;
    bool diverged = false;
    if (spec.algo == Algo::AM) {
      AmParams params;
      params.max_iterations = T;
      params.record_trace = record;
      params.rank_tol = spec.rank_tol;
      std::tie(W, trace) = train_one_hidden(ds.X, ds.y, W0, params, &Wref);
    } else {
      GdParams params;
      params.eta = spec.eta;
      params.max_iterations = T;
      params.record_trace = record;
      try {
        std::tie(W, trace) = train_gd(ds.X, ds.y, W0, params, &Wref);
      } catch (const DivergenceError&) {
        diverged = true;
      }
    }
    if (diverged) {
      result.success = false;
      result.relative_error = std::numeric_limits<double>::infinity();
      result.iterations_used = 0;
    } else {
      const RecoveryReport rep = recovery_success(W, Wref, spec.threshold);
      result.success = rep.success;
      result.relative_error = rep.relative_error;
      result.iterations_used = trace.completed_iterations;
      result.trace = std::move(trace);
    }
  }
  result.wall_time = detail::seconds_since(t0);
  return result;
}

// Runs the whole grid; trials execute on `jobs` threads, each writing into a
// preallocated slot, so the aggregate is independent of scheduling.
inline ExperimentResults run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  const std::vector<GridPoint> grid = expand_grid(spec);
  const int trials = spec.trials;
  const std::size_t total = grid.size() * static_cast<std::size_t>(trials);

  ExperimentResults results;
  results.spec = spec;
  results.trials.resize(total);

  int jobs = spec.jobs > 0 ? spec.jobs
                           : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min<std::size_t>(jobs, total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        const GridPoint& pt = grid[i / trials];
        results.trials[i] = run_trial(spec, pt, static_cast<int>(i % trials));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t g = 0; g < grid.size(); ++g) {
    PointSummary s;
    s.point = grid[g];
    s.trials = trials;
    for (int t = 0; t < trials; ++t)
      s.successes += results.trials[g * trials + t].success ? 1 : 0;
    results.summary.push_back(s);
  }
  return results;
}

// --- CSV ------------------------------------------------------------------

namespace detail {

inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string csv_header(const ExperimentSpec& spec) {
  return is_loss_kind(spec.kind)
             ? "arch,algo,init,d,k,n,trial,iteration,residual,param_dist"
             : "arch,algo,init,d,k,k_o,n,trials,successes,probability";
}

// Result table: one row per grid point for phase experiments, one row per
// trace record for loss experiments.
inline void write_csv_stream(const ExperimentResults& results, std::ostream& os) {
  const ExperimentSpec& spec = results.spec;
  os << csv_header(spec) << "\n";
  const std::string prefix =
      to_string(spec.arch) + "," + to_string(spec.algo) + "," + to_string(spec.init.kind);
  if (is_loss_kind(spec.kind)) {
    for (const TrialResult& tr : results.trials)
      for (const TraceRecord& rec : tr.trace.records)
        os << prefix << ',' << tr.point.d << ',' << tr.point.k << ',' << tr.point.n << ','
           << tr.trial << ',' << rec.iteration << ',' << detail::g17(rec.residual) << ','
           << detail::g17(rec.param_dist) << "\n";
  } else {
    for (const PointSummary& s : results.summary)
      os << prefix << ',' << s.point.d << ',' << s.point.k << ',' << s.point.ko << ','
         << s.point.n << ',' << s.trials << ',' << s.successes << ','
         << detail::g17(static_cast<double>(s.successes) / s.trials) << "\n";
  }
}

// Writes the result table plus a `<path>.meta` sidecar with the full spec.
// Deterministic bytes for a given (spec, seed).
inline void write_csv(const ExperimentResults& results, const std::string& path) {
  const ExperimentSpec& spec = results.spec;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  write_csv_stream(results, os);
  os.flush();
  if (!os) throw std::runtime_error("write_csv: failed writing '" + path + "'");

  std::ofstream meta(path + ".meta", std::ios::binary);
  if (!meta) throw std::runtime_error("write_csv: cannot open '" + path + ".meta'");
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  };
  const char* kind_name = nullptr;
  switch (spec.kind) {
    case ExperimentKind::SingleNeuronPhase: kind_name = "phase"; break;
    case ExperimentKind::OneHiddenPhase: kind_name = "phase"; break;
    case ExperimentKind::SkippedPhase: kind_name = "phase"; break;
    case ExperimentKind::TwoHiddenPhase: kind_name = "phase"; break;
    case ExperimentKind::LossCurve: kind_name = "losscurve"; break;
    case ExperimentKind::TwoHiddenLoss: kind_name = "losscurve"; break;
  }
  meta << "version = " << kVersion << "\n"
       << "experiment = " << kind_name << "\n"
       << "arch = " << to_string(spec.arch) << "\n"
       << "algo = " << to_string(spec.algo) << "\n"
       << "init = " << to_string(spec.init.kind) << "\n"
       << "delta = " << detail::g17(spec.init.delta) << "\n"
       << "scale = " << detail::g17(spec.init.scale) << "\n"
       << "cmult = " << detail::g17(spec.init.c_mult) << "\n"
       << "d = " << join(spec.d_values) << "\n"
       << "k = " << join(spec.k_values) << "\n"
       << "ko = " << join(spec.ko_values) << "\n"
       << "n = " << join(spec.n_values) << "\n"
       << "trials = " << spec.trials << "\n"
       << "T = " << resolve_T(spec) << "\n"
       << "seed = " << spec.seed << "\n"
       << "eta = " << detail::g17(spec.eta) << "\n"
       << "gamma = " << detail::g17(spec.gamma) << "\n"
       << "kappa = " << detail::g17(spec.kappa) << "\n"
       << "threshold = " << detail::g17(spec.threshold) << "\n"
       << "jobs = " << spec.jobs << "\n"
       << "rank_tol = " << detail::g17(spec.rank_tol) << "\n";
  meta << "cli_overrides = ";
  for (std::size_t i = 0; i < spec.overridden_keys.size(); ++i)
    meta << (i ? "," : "") << spec.overridden_keys[i];
  meta << "\n";
}

struct PhaseRow {
  std::string arch, algo, init;
  int d = 0, k = 0, ko = 0, n = 0, trials = 0, successes = 0;
  double probability = 0.0;
};

inline std::vector<PhaseRow> read_phase_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_phase_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("read_phase_csv: empty file '" + path + "'");
  std::vector<PhaseRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    PhaseRow r;
    auto next = [&]() {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("read_phase_csv: malformed row '" + line + "'");
      return field;
    };
    r.arch = next();
    r.algo = next();
    r.init = next();
    r.d = std::stoi(next());
    r.k = std::stoi(next());
    r.ko = std::stoi(next());
    r.n = std::stoi(next());
    r.trials = std::stoi(next());
    r.successes = std::stoi(next());
    r.probability = std::stod(next());
    rows.push_back(r);
  }
  return rows;
}

}  // namespace reluam
