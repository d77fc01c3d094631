#pragma once

// Run grids of (axis value, strategy, seed) on a worker pool and write run
// records, per-figure CSVs and a JSON manifest.

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "erto/config.hpp"
#include "erto/metrics.hpp"
#include "erto/simcore.hpp"

namespace erto {

inline constexpr std::string_view kVersion = "0.1.0";

/// A run that threw, tagged with the grid cell it belongs to.
class RunError : public Error {
 public:
  using Error::Error;
};

struct RunKey {
  double axis_value;
  std::string strategy;
  std::uint64_t seed;
};

struct RunRecord {
  RunKey key;
  RunMetrics metrics;
};

inline std::string describe(const ExperimentSpec& spec, const RunKey& k) {
  std::string s = "(";
  if (spec.axis) s += std::string(axis_name(*spec.axis)) + "=" + format_float(k.axis_value) + ", ";
  return s + "strategy=" + k.strategy + ", seed=" + std::to_string(k.seed) + ")";
}

/// Grid cells in merge order: axis value, then strategy (as listed), then seed.
inline std::vector<RunKey> grid(const ExperimentSpec& spec) {
  std::vector<RunKey> keys;
  const std::vector<double> values = spec.axis ? spec.values : std::vector<double>{0.0};
  for (double v : values)
    for (const auto& s : spec.strategies)
      for (auto seed : spec.seeds) keys.push_back({v, s, seed});
  return keys;
}

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// Execute every grid cell. Results come back in grid order whatever the
/// worker count. The first failure (in grid order) is rethrown as RunError.
inline std::vector<RunRecord> run_grid(const ExperimentSpec& spec, unsigned workers = 0, const Progress& progress = {}) {
  const auto keys = grid(spec);
  std::vector<RunRecord> out(keys.size());
  std::vector<std::exception_ptr> errors(keys.size());
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      try {
        const double v = keys[i].axis_value;
        out[i] = {keys[i], Simulator(spec.at(v, keys[i].strategy, keys[i].seed)).run()};
      } catch (...) {
        errors[i] = std::current_exception();
      }
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(d, keys.size());
      }
    }
  };
  if (workers == 0) workers = default_workers();
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, keys.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw RunError("run " + describe(spec, keys[i]) + " failed: " + e.what());
    }
  }
  return out;
}

inline SweepResult to_sweep(const ExperimentSpec& spec, const std::vector<RunRecord>& records) {
  SweepResult r;
  r.axis = spec.axis.value_or(Axis::NodeCount);
  for (const auto& rec : records) {
    if (r.points.empty() || r.points.back().axis_value != rec.key.axis_value)
      r.points.push_back({rec.key.axis_value, {}});
    r.points.back().runs[rec.key.strategy].push_back(rec.metrics);
  }
  return r;
}

inline const std::vector<std::string>& drop_causes() {
  static const std::vector<std::string> causes{"node_death",    "queue_overflow", "retry_limit",
                                               "routing_void", "sim_end",        "source_dead"};
  return causes;
}

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "axis,strategy,seed,pdr,mean_delay,throughput,residual_energy_ratio,power_adjustments,generated,delivered,"
        "sends,transmissions,fallbacks,mean_hops";
  for (const auto& c : drop_causes()) os << ",drop_" << c;
  os << '\n';
  for (const auto& r : records) {
    const auto& m = r.metrics;
    os << format_float(r.key.axis_value) << ',' << r.key.strategy << ',' << r.key.seed << ',' << format_float(m.pdr)
       << ',' << format_float(m.mean_delay) << ',' << format_float(m.throughput) << ','
       << format_float(m.residual_energy_ratio) << ',' << m.power_adjustments << ',' << m.generated << ','
       << m.delivered << ',' << m.sends << ',' << m.transmissions << ',' << m.fallbacks << ','
       << format_float(m.mean_hops);
    for (const auto& c : drop_causes()) {
      const auto it = m.drops_by_cause.find(c);
      os << ',' << (it == m.drops_by_cause.end() ? 0 : it->second);
    }
    os << '\n';
  }
}

inline nlohmann::ordered_json config_json(const SimConfig& c) {
  nlohmann::ordered_json j;
  j["area_w"] = c.area_w;
  j["area_h"] = c.area_h;
  j["node_count"] = c.node_count;
  j["cbr_pairs"] = c.cbr_pairs;
  j["cbr_rate"] = c.cbr_rate;
  j["sim_time"] = c.sim_time;
  j["retx_limit"] = c.retx_limit;
  j["coordination_delay"] = c.coordination_delay;
  j["initial_energy"] = c.initial_energy;
  j["initial_power"] = c.initial_power;
  j["queue_capacity"] = c.queue_capacity;
  j["half_duplex"] = c.half_duplex;
  j["link_model"] = c.link_model == LinkModelKind::Ideal ? "ideal" : "analytic";
  j["front_solver"] = c.front_solver == FrontSolver::Evolutionary ? "evolutionary" : "exhaustive";
  j["residual_sample_times"] = c.residual_sample_times;
  j["channel"] = {{"eta", c.ch.eta}, {"K", c.ch.K},       {"G", c.ch.G},
                  {"beta", c.ch.beta}, {"sigma", c.ch.sigma}, {"P_n", c.ch.P_n},
                  {"P_thresh", c.ch.P_thresh}, {"alpha_sq", c.ch.alpha_sq}};
  j["radio"] = {{"p_min", c.rp.p_min}, {"p_max", c.rp.p_max}, {"power_step", c.rp.power_step},
                {"E_r", c.rp.E_r},     {"xi", c.rp.xi},       {"L", c.rp.L},
                {"B", c.rp.B}};
  j["ea"] = {{"population", c.ea.population},
             {"generations", c.ea.generations},
             {"crossover_rate", c.ea.crossover_rate},
             {"mutation_rate", c.ea.mutation_rate},
             {"seed", c.ea.seed}};
  return j;
}

inline nlohmann::ordered_json manifest_json(const ExperimentSpec& spec, const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["artifact"] = "erto";
  j["version"] = kVersion;
  j["axis"] = spec.axis ? std::string(axis_name(*spec.axis)) : "none";
  j["values"] = spec.axis ? spec.values : std::vector<double>{};
  j["strategies"] = spec.strategies;
  j["seeds"] = spec.seeds;
  j["config"] = config_json(spec.base);
  j["files"] = files;
  return j;
}

struct SweepOutputs {
  std::vector<std::string> files;  // relative to the output directory
  Summary summary;
};

/// Write runs.csv, one CSV per metric along the sweep axis, the residual
/// energy time series of every axis point and manifest.json.
inline SweepOutputs write_sweep_outputs(const ExperimentSpec& spec, const std::vector<RunRecord>& records) {
  namespace fs = std::filesystem;
  const fs::path dir(spec.out_dir);
  fs::create_directories(dir);
  SweepOutputs out;
  auto open = [&](const std::string& name) {
    out.files.push_back(name);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("runs.csv");
    write_runs_csv(f, records);
  }
  const auto sweep = to_sweep(spec, records);
  if (spec.seeds.size() >= 2) {
    out.summary = aggregate(sweep);
    const std::string axis = spec.axis ? std::string(axis_name(*spec.axis)) : "point";
    for (Metric m : {Metric::Pdr, Metric::Delay, Metric::Throughput, Metric::Residual}) {
      auto f = open(axis + "_" + std::string(metric_name(m)) + ".csv");
      write_figure_csv(f, out.summary, m);
    }
    for (const auto& pt : sweep.points) {
      auto f = open("residual_time_" + axis + "_" + format_float(pt.axis_value) + ".csv");
      write_figure_csv(f, residual_over_time(pt), Metric::Residual);
    }
  }
  out.files.push_back("manifest.json");
  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  mf << manifest_json(spec, out.files).dump(2) << '\n';
  return out;
}

inline void write_front_csv(std::ostream& os, std::string_view solver, const std::vector<ParetoSolution>& front) {
  for (const auto& s : front)
    os << solver << ',' << format_float(s.p_ts) << ',' << s.n_rel << ',' << format_float(s.pdr_sc) << ','
       << format_float(s.p_md) << ',' << format_float(s.cost) << '\n';
}

}  // namespace erto
