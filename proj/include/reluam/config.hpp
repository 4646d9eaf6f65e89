#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "reluam/harness.hpp"

namespace reluam {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline long long parse_ll(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("malformed integer for '" + key + "': '" + value + "'");
  }
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("malformed number for '" + key + "': '" + value + "'");
  }
}

// Grid axis values: a scalar "100", a range "50:500:50" (inclusive stop), or
// a comma list "50,70,90,100".
inline std::vector<int> parse_int_axis(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (value.find(':') != std::string::npos) {
    const std::size_t c1 = value.find(':');
    const std::size_t c2 = value.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw std::invalid_argument("malformed range for '" + key + "': '" + value +
                                  "' (expected start:stop:step)");
    const long long start = parse_ll(key, value.substr(0, c1));
    const long long stop = parse_ll(key, value.substr(c1 + 1, c2 - c1 - 1));
    const long long step = parse_ll(key, value.substr(c2 + 1));
    if (step <= 0 || stop < start)
      throw std::invalid_argument("malformed range for '" + key + "': '" + value + "'");
    for (long long v = start; v <= stop; v += step) out.push_back(static_cast<int>(v));
    return out;
  }
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const std::size_t comma = value.find(',', pos);
    const std::string tok = value.substr(pos, comma == std::string::npos ? std::string::npos
                                                                         : comma - pos);
    out.push_back(static_cast<int>(parse_ll(key, trim(tok))));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment", "mode", "arch", "algo", "init", "delta", "scale", "cmult",
      "eta",        "gamma", "kappa", "d",   "k",    "ko",    "n",     "trials",
      "T",          "threshold", "seed", "jobs", "out", "rank-tol"};
  return keys;
}

// `key = value` lines; '#' starts a comment; unknown keys are hard errors.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config " + path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key))
      throw std::invalid_argument("config " + path + ":" + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    if (kv.count(key))
      throw std::invalid_argument("config " + path + ":" + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

}  // namespace detail

// Builds an ExperimentSpec from CLI arguments (without the program name).
// Grammar: [train|phase|losscurve|twohidden] (--key value)*. A config file
// supplied via --config provides defaults for any key not given as a flag;
// flags win on conflict and the shadowed keys are recorded in the spec.
inline ExperimentSpec parse_config(const std::vector<std::string>& args) {
  std::map<std::string, std::string> flags;
  std::string command;
  std::size_t i = 0;
  if (i < args.size() && !args[i].starts_with("--")) {
    command = args[i];
    if (command != "train" && command != "phase" && command != "losscurve" &&
        command != "twohidden")
      throw std::invalid_argument("unknown subcommand '" + command + "'");
    ++i;
  }
  std::string config_path;
  for (; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (!a.starts_with("--"))
      throw std::invalid_argument("unexpected argument '" + a + "'");
    const std::string key = a.substr(2);
    if (key != "config" && !detail::known_keys().count(key))
      throw std::invalid_argument("unknown flag '--" + key + "'");
    if (i + 1 >= args.size())
      throw std::invalid_argument("flag '--" + key + "' expects a value");
    const std::string value = args[++i];
    if (key == "config") {
      config_path = value;
    } else if (flags.count(key)) {
      throw std::invalid_argument("flag '--" + key + "' given twice");
    } else {
      flags[key] = value;
    }
  }

  if (flags.count("experiment"))
    throw std::invalid_argument("'experiment' is selected by the subcommand, not a flag");

  ExperimentSpec spec;
  std::vector<std::string> overridden;
  std::map<std::string, std::string> kv = flags;
  if (!config_path.empty()) {
    spec.config_file = config_path;
    for (const auto& [key, value] : detail::read_config_file(config_path)) {
      if (key == "experiment") {
        if (command.empty())
          command = value;
        else if (command != value)
          overridden.push_back("experiment");  // subcommand wins
        continue;
      }
      if (kv.count(key))
        overridden.push_back(key);  // flag wins
      else
        kv[key] = value;
    }
  }
  if (command.empty())
    throw std::invalid_argument("missing required key 'experiment' (subcommand or config)");
  if (command != "train" && command != "phase" && command != "losscurve" &&
      command != "twohidden")
    throw std::invalid_argument("unknown experiment '" + command + "'");
  std::sort(overridden.begin(), overridden.end());
  spec.overridden_keys = std::move(overridden);

  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  // architecture first; defaults of several keys depend on it
  if (command == "twohidden") {
    if (auto a = take("arch"); a && *a != "twohidden")
      throw std::invalid_argument("the twohidden command implies --arch twohidden");
    spec.arch = Arch::TwoHidden;
  } else if (auto a = take("arch")) {
    spec.arch = arch_from_string(*a);
  } else {
    spec.arch = Arch::OneHidden;
  }

  std::string mode = command == "losscurve" || command == "train" ? "loss" : "phase";
  if (auto m = take("mode")) {
    if (command != "twohidden")
      throw std::invalid_argument("--mode is only meaningful for the twohidden command");
    if (*m != "phase" && *m != "loss")
      throw std::invalid_argument("unknown mode '" + *m + "' (expected phase or loss)");
    mode = *m;
  }

  spec.single_run = command == "train";
  if (mode == "loss") {
    spec.kind = spec.arch == Arch::TwoHidden ? ExperimentKind::TwoHiddenLoss
                                             : ExperimentKind::LossCurve;
  } else {
    switch (spec.arch) {
      case Arch::SingleNeuron: spec.kind = ExperimentKind::SingleNeuronPhase; break;
      case Arch::OneHidden: spec.kind = ExperimentKind::OneHiddenPhase; break;
      case Arch::Skipped: spec.kind = ExperimentKind::SkippedPhase; break;
      case Arch::TwoHidden: spec.kind = ExperimentKind::TwoHiddenPhase; break;
    }
  }

  if (auto v = take("algo")) spec.algo = algo_from_string(*v);
  if (auto v = take("init")) {
    spec.init.kind = init_from_string(*v);
  } else {
    switch (spec.arch) {
      case Arch::SingleNeuron: spec.init.kind = InitKind::Zero; break;
      case Arch::Skipped: spec.init.kind = InitKind::IdentitySkipped; break;
      default: spec.init.kind = InitKind::PerturbedTruth; break;
    }
  }
  if (auto v = take("delta")) spec.init.delta = detail::parse_double("delta", *v);
  if (auto v = take("scale")) spec.init.scale = detail::parse_double("scale", *v);
  if (auto v = take("cmult")) spec.init.c_mult = detail::parse_double("cmult", *v);
  if (auto v = take("eta")) spec.eta = detail::parse_double("eta", *v);
  if (auto v = take("gamma")) spec.gamma = detail::parse_double("gamma", *v);
  if (auto v = take("kappa")) spec.kappa = detail::parse_double("kappa", *v);
  if (auto v = take("threshold")) spec.threshold = detail::parse_double("threshold", *v);
  if (auto v = take("rank-tol")) spec.rank_tol = detail::parse_double("rank-tol", *v);
  if (auto v = take("d")) spec.d_values = detail::parse_int_axis("d", *v);
  if (auto v = take("k")) {
    spec.k_values = detail::parse_int_axis("k", *v);
  } else {
    switch (spec.arch) {
      case Arch::SingleNeuron: spec.k_values = {1}; break;
      case Arch::TwoHidden: spec.k_values = {3}; break;
      default: spec.k_values = {5}; break;
    }
  }
  if (auto v = take("ko")) spec.ko_values = detail::parse_int_axis("ko", *v);
  if (auto v = take("n")) spec.n_values = detail::parse_int_axis("n", *v);
  if (auto v = take("trials")) spec.trials = static_cast<int>(detail::parse_ll("trials", *v));
  if (spec.single_run) spec.trials = 1;
  if (auto v = take("T")) spec.T = static_cast<int>(detail::parse_ll("T", *v));
  if (auto v = take("jobs")) spec.jobs = static_cast<int>(detail::parse_ll("jobs", *v));
  if (auto v = take("out")) spec.out = *v;
  if (auto v = take("seed")) {
    spec.seed = static_cast<std::uint64_t>(detail::parse_ll("seed", *v));
  } else {
    throw std::invalid_argument("missing required key 'seed' (--seed or config)");
  }
  if (spec.algo == Algo::GD && !(spec.eta > 0.0))
    throw std::invalid_argument("missing required flag '--eta' for gd runs");

  validate_spec(spec);
  return spec;
}

}  // namespace reluam
