#pragma once

// YAML experiment specification: every field optional, unknown keys rejected
// with a suggestion, errors tagged with the offending line.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "erto/errors.hpp"
#include "erto/metrics.hpp"
#include "erto/simcore.hpp"
#include "erto/synthetic.hpp"

namespace erto {

struct ExperimentSpec {
  SimConfig base;
  std::optional<Axis> axis = Axis::NodeCount;  // nullopt: one point at `base`
  std::vector<double> values{40, 60, 80, 100, 120};
  std::vector<std::string> strategies{"erto", "exor", "tcor", "eeor"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string out_dir = "results";

  /// Config for one run of the grid.
  SimConfig at(double axis_value, const std::string& strategy, std::uint64_t seed) const {
    SimConfig c = base;
    c.strategy = strategy;
    c.seed = seed;
    if (axis == Axis::NodeCount) c.node_count = static_cast<int>(axis_value);
    if (axis == Axis::CbrPairs) c.cbr_pairs = static_cast<int>(axis_value);
    return c;
  }

  void validate() const {
    base.validate();
    if (strategies.empty()) throw ConfigError("strategies: need at least one");
    for (const auto& s : strategies) make_strategy(s);
    if (seeds.empty()) throw ConfigError("seeds: need at least one");
    if (axis) {
      if (values.empty()) throw ConfigError("sweep.values: need at least one value");
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && !(values[i] > values[i - 1])) throw ConfigError("sweep.values must be strictly increasing");
        if (values[i] != std::floor(values[i])) throw ConfigError("sweep.values must be whole numbers");
        if (axis == Axis::NodeCount && values[i] < 2) throw ConfigError("sweep.values: node_count must be >= 2");
        if (axis == Axis::CbrPairs && values[i] < 1) throw ConfigError("sweep.values: cbr_pairs must be >= 1");
        if (axis == Axis::Time) throw ConfigError("sweep.axis: time is reported per run, not swept");
      }
    }
  }
};

namespace detail {

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1])});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::optional<std::string> closest_key(std::string_view key, const std::vector<std::string>& known) {
  std::optional<std::string> best;
  std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
  for (const auto& k : known) {
    const std::size_t d = levenshtein(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

inline std::size_t line_of(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? static_cast<std::size_t>(m.line) + 1 : 0;
}

/// One mapping node: typed lookups plus a check that no unknown key is left.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ConfigError(label() + "expected a mapping", line_of(node_));
  }

  bool present() const { return node_ && node_.IsMap(); }

  YAML::Node raw(const std::string& key) {
    known_.push_back(key);
    if (!present()) return YAML::Node(YAML::NodeType::Undefined);
    return node_[key];
  }

  template <class T>
  void get(const std::string& key, T& out, const std::function<bool(const T&)>& ok = {},
           std::string_view requirement = {}) {
    YAML::Node v = raw(key);
    if (!v) return;
    T parsed;
    try {
      parsed = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(label() + key + ": wrong type", line_of(v));
    }
    if (ok && !ok(parsed)) throw ConfigError(label() + key + " " + std::string(requirement), line_of(v));
    out = parsed;
  }

  Section child(const std::string& key) { return Section(raw(key), path_.empty() ? key : path_ + "." + key); }

  void finish() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (std::find(known_.begin(), known_.end(), key) != known_.end()) continue;
      std::string msg = "unknown key '" + (path_.empty() ? key : path_ + "." + key) + "'";
      if (auto s = closest_key(key, known_)) msg += " (did you mean '" + *s + "'?)";
      throw ConfigError(msg, line_of(kv.first));
    }
  }

  std::size_t line() const { return line_of(node_); }

 private:
  std::string label() const { return path_.empty() ? "" : path_ + "."; }

  YAML::Node node_;
  std::string path_;
  std::vector<std::string> known_;
};

template <class T>
std::function<bool(const T&)> at_least(T lo) {
  return [lo](const T& v) { return v >= lo; };
}

inline std::function<bool(const double&)> positive() {
  return [](const double& v) { return v > 0.0; };
}

inline std::vector<std::uint64_t> parse_seed_range(std::string_view text, std::size_t line) {
  const auto dots = text.find("..");
  auto parse = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError("seeds: expected N..M, got '" + std::string(text) + "'", line);
    return v;
  };
  if (dots == std::string_view::npos) return {parse(text)};
  const auto lo = parse(text.substr(0, dots)), hi = parse(text.substr(dots + 2));
  if (hi < lo) throw ConfigError("seeds: empty range '" + std::string(text) + "'", line);
  if (hi - lo >= 100000) throw ConfigError("seeds: range too large", line);
  std::vector<std::uint64_t> out;
  for (auto s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

inline void read_channel(Section sec, ChannelParams& ch) {
  double cal_power = ChannelParams::kCalibrationPower, cal_range = ChannelParams::kCalibrationRange;
  std::optional<double> K;
  sec.get<double>("eta", ch.eta, [](const double& v) { return v >= 2.0 && v <= 5.0; }, "must lie in [2, 5]");
  sec.get<double>("G", ch.G, at_least(1.0), "must be >= 1");
  sec.get<double>("beta", ch.beta, positive(), "must be positive");
  sec.get<double>("sigma", ch.sigma, positive(), "must be positive");
  sec.get<double>("P_n", ch.P_n, at_least(0.0), "must be >= 0");
  sec.get<double>("P_thresh", ch.P_thresh, positive(), "must be positive");
  sec.get<double>("alpha_sq", ch.alpha_sq, positive(), "must be positive");
  sec.get<double>("calibration_power", cal_power, positive(), "must be positive");
  sec.get<double>("calibration_range", cal_range, positive(), "must be positive");
  double k = 0.0;
  if (auto n = sec.raw("K")) {
    sec.get<double>("K", k, positive(), "must be positive");
    K = k;
  }
  sec.finish();
  if (!(ch.P_thresh > ch.P_n)) throw ConfigError("channel.P_thresh must exceed P_n", sec.line());
  if (K)
    ch.K = *K;
  else
    ch.calibrate(cal_power, cal_range);
}

inline void read_radio(Section sec, RadioParams& rp) {
  sec.get<double>("p_min", rp.p_min, positive(), "must be positive");
  sec.get<double>("p_max", rp.p_max, positive(), "must be positive");
  sec.get<double>("power_step", rp.power_step, positive(), "must be positive");
  sec.get<double>("E_r", rp.E_r, positive(), "must be positive");
  sec.get<double>("xi", rp.xi, positive(), "must be positive");
  sec.get<double>("L", rp.L, positive(), "must be positive");
  sec.get<double>("B", rp.B, positive(), "must be positive");
  sec.finish();
  if (!(rp.p_max >= rp.p_min)) throw ConfigError("radio.p_max must be >= p_min", sec.line());
}

inline void read_ea(Section sec, EaParams& ea) {
  sec.get<int>("population", ea.population, at_least(2), "must be >= 2");
  sec.get<int>("generations", ea.generations, at_least(0), "must be >= 0");
  sec.get<double>("crossover_rate", ea.crossover_rate, [](const double& v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
  sec.get<double>("mutation_rate", ea.mutation_rate, [](const double& v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
  sec.get<std::uint64_t>("seed", ea.seed);
  sec.finish();
}

template <class E>
E read_enum(Section& sec, const std::string& key, E current, std::initializer_list<std::pair<std::string_view, E>> names) {
  YAML::Node n = sec.raw(key);
  if (!n) return current;
  std::string v;
  try {
    v = n.as<std::string>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key + ": wrong type", line_of(n));
  }
  std::string options;
  for (const auto& [name, e] : names) {
    if (name == v) return e;
    options += (options.empty() ? "" : ", ") + std::string(name);
  }
  throw ConfigError(key + ": '" + v + "' is not one of " + options, line_of(n));
}

inline void read_sim(Section sec, SimConfig& c) {
  sec.get<double>("area_w", c.area_w, positive(), "must be positive");
  sec.get<double>("area_h", c.area_h, positive(), "must be positive");
  sec.get<int>("node_count", c.node_count, at_least(2), "must be >= 2");
  sec.get<int>("cbr_pairs", c.cbr_pairs, at_least(1), "must be >= 1");
  sec.get<double>("cbr_rate", c.cbr_rate, positive(), "must be positive");
  sec.get<double>("sim_time", c.sim_time, positive(), "must be positive");
  sec.get<std::uint64_t>("seed", c.seed);
  sec.get<int>("retx_limit", c.retx_limit, at_least(1), "must be >= 1");
  sec.get<double>("coordination_delay", c.coordination_delay, at_least(0.0), "must be >= 0");
  sec.get<double>("initial_energy", c.initial_energy, positive(), "must be positive");
  sec.get<double>("initial_power", c.initial_power, positive(), "must be positive");
  sec.get<int>("queue_capacity", c.queue_capacity, at_least(1), "must be >= 1");
  sec.get<bool>("half_duplex", c.half_duplex);
  c.link_model = read_enum(sec, "link_model", c.link_model,
                           {{"analytic", LinkModelKind::Analytic}, {"ideal", LinkModelKind::Ideal}});
  c.front_solver = read_enum(sec, "front_solver", c.front_solver,
                             {{"exhaustive", FrontSolver::Exhaustive}, {"evolutionary", FrontSolver::Evolutionary}});
  sec.get<std::vector<double>>("residual_sample_times", c.residual_sample_times,
                               [](const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); },
                               "must be ascending");
  sec.finish();
}

}  // namespace detail

/// Parse an experiment spec from YAML text. An empty document yields the
/// defaults.
inline ExperimentSpec parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error: " + e.msg, e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0);
  }
  ExperimentSpec spec;
  detail::Section top(root, "");
  detail::read_sim(top.child("sim"), spec.base);
  detail::read_channel(top.child("channel"), spec.base.ch);
  detail::read_radio(top.child("radio"), spec.base.rp);
  detail::read_ea(top.child("ea"), spec.base.ea);

  detail::Section sweep = top.child("sweep");
  spec.axis = detail::read_enum<std::optional<Axis>>(
      sweep, "axis", spec.axis,
      {{"node_count", Axis::NodeCount}, {"cbr_pairs", Axis::CbrPairs}, {"none", std::nullopt}});
  if (spec.axis == Axis::CbrPairs) spec.values = {20, 40, 60, 80, 100};
  sweep.get<std::vector<double>>("values", spec.values);
  sweep.finish();

  if (YAML::Node s = top.raw("strategies")) {
    try {
      spec.strategies = s.IsSequence() ? s.as<std::vector<std::string>>() : std::vector<std::string>{s.as<std::string>()};
    } catch (const YAML::Exception&) {
      throw ConfigError("strategies: expected a list of names", detail::line_of(s));
    }
    for (const auto& name : spec.strategies) {
      try {
        make_strategy(name);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("strategies: ") + e.what(), detail::line_of(s));
      }
    }
  }
  if (YAML::Node s = top.raw("seeds")) {
    try {
      if (s.IsSequence())
        spec.seeds = s.as<std::vector<std::uint64_t>>();
      else
        spec.seeds = detail::parse_seed_range(s.as<std::string>(), detail::line_of(s));
    } catch (const YAML::Exception&) {
      throw ConfigError("seeds: expected a list or N..M", detail::line_of(s));
    }
  }
  top.get<std::string>("out", spec.out_dir);
  top.finish();
  spec.validate();
  return spec;
}

inline ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Synthetic optimization context for the front subcommand.
inline SyntheticContextSpec parse_front_spec(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error: " + e.msg, e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0);
  }
  SyntheticContextSpec spec;
  detail::Section top(root, "");
  top.get<std::uint64_t>("seed", spec.seed);
  top.get<double>("d_sd", spec.d_sd, detail::positive(), "must be positive");
  top.get<double>("rho", spec.rho, detail::positive(), "must be positive");
  top.get<int>("candidates", spec.candidates, detail::at_least(1), "must be >= 1");
  top.get<int>("max_degree", spec.max_degree, detail::at_least(1), "must be >= 1");
  top.get<int>("max_interferers", spec.max_interferers, detail::at_least(0), "must be >= 0");
  detail::read_channel(top.child("channel"), spec.ch);
  detail::read_radio(top.child("radio"), spec.rp);
  top.finish();
  spec.ch.validate();
  spec.rp.validate();
  return spec;
}

inline SyntheticContextSpec load_front_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read front spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_front_spec(ss.str());
}

}  // namespace erto
