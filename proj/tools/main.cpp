// Command-line front end: single training runs with a printed trace, and
// seeded Monte-Carlo experiment grids written to CSV.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "reluam/config.hpp"
#include "reluam/harness.hpp"

namespace {

void print_usage() {
  std::cout <<
      "usage: reluam <command> [--flag value ...]\n"
      "\n"
      "commands:\n"
      "  train       run a single trial and print its per-iteration trace\n"
      "  phase       Monte-Carlo recovery-probability grid -> CSV\n"
      "  losscurve   per-iteration residual traces -> CSV\n"
      "  twohidden   two-hidden-layer experiments (--mode phase|loss)\n"
      "\n"
      "flags:\n"
      "  --arch {single|onehidden|skipped|twohidden}   architecture\n"
      "  --algo {am|gd}                                trainer (default am)\n"
      "  --init {zero|perturbed|random|identity|tensor}\n"
      "  --delta X      perturbation size for perturbed init (default 0.9)\n"
      "  --scale X      scale for random init (default 0.0001)\n"
      "  --cmult X      shift multiplier for tensor init (default 3)\n"
      "  --eta X        gd step size (required for gd)\n"
      "  --gamma X      skipped-teacher weight scale (default 3)\n"
      "  --kappa X      one-hidden teacher condition number (default 1.8)\n"
      "  --d/--k/--ko/--n   grid axes: scalar, start:stop:step, or v1,v2,...\n"
      "  --trials N     Monte-Carlo trials per grid point\n"
      "  --T N          iteration budget (defaults depend on the run)\n"
      "  --threshold X  recovery threshold (default 0.01)\n"
      "  --seed N       root seed (required)\n"
      "  --jobs N       worker threads (default: all cores)\n"
      "  --rank-tol X   least-squares rank tolerance override\n"
      "  --out PATH     CSV output path (a PATH.meta sidecar is also written)\n"
      "  --config FILE  key = value defaults; flags override the file\n";
}

int run_train(const reluam::ExperimentSpec& spec) {
  const std::vector<reluam::GridPoint> grid = reluam::expand_grid(spec);
  if (grid.size() != 1) {
    std::cerr << "train expects scalar --d/--k/--ko/--n\n";
    return 1;
  }
  const reluam::TrialResult r = reluam::run_trial(spec, grid.front(), 0);
  std::printf("# arch=%s algo=%s init=%s d=%d k=%d k_o=%d n=%d seed=%llu\n",
              reluam::to_string(spec.arch).c_str(), reluam::to_string(spec.algo).c_str(),
              reluam::to_string(spec.init.kind).c_str(), r.point.d, r.point.k, r.point.ko,
              r.point.n, static_cast<unsigned long long>(spec.seed));
  std::printf("%-10s %-24s %-24s %s\n", "iteration", "residual", "param_dist", "sign_flips");
  for (const reluam::TraceRecord& rec : r.trace.records)
    std::printf("%-10d %-24.17g %-24.17g %d\n", rec.iteration, rec.residual,
                rec.param_dist, rec.sign_flips);
  std::printf("# iterations=%d relative_error=%.17g success=%s\n", r.iterations_used,
              r.relative_error, r.success ? "true" : "false");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    print_usage();
    return args.empty() ? 1 : 0;
  }
  try {
    const reluam::ExperimentSpec spec = reluam::parse_config(args);
    if (spec.single_run) return run_train(spec);

    const reluam::ExperimentResults results = reluam::run_experiment(spec);
    if (spec.out.empty()) {
      std::cerr << "no --out given; printing CSV to stdout\n";
      reluam::write_csv_stream(results, std::cout);
    } else {
      reluam::write_csv(results, spec.out);
      std::cout << "wrote " << spec.out << " and " << spec.out << ".meta\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
