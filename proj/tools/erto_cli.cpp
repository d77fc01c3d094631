// erto: run single simulations, sweeps and Pareto-front dumps.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "erto/config.hpp"
#include "erto/experiment.hpp"
#include "erto/paretoctl.hpp"
#include "erto/synthetic.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out;
  std::vector<std::string> strategies;
  unsigned workers = 0;
  std::string trace;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "YAML experiment file (defaults apply when omitted)")->envname("ERTO_CONFIG");
  cmd->add_option("--seed", o.seed, "single seed")->envname("ERTO_SEED");
  cmd->add_option("--seeds", o.seeds, "seed range N..M")->envname("ERTO_SEEDS");
  cmd->add_option("--out", o.out, "output directory")->envname("ERTO_OUT");
  cmd->add_option("--strategy", o.strategies, "erto, exor, tcor, eeor (comma separated)")
      ->delimiter(',')
      ->envname("ERTO_STRATEGY");
  cmd->add_option("--workers", o.workers, "parallel runs (default: available cores)")->envname("ERTO_WORKERS");
  cmd->add_flag("-q,--quiet", o.quiet, "no progress output");
}

erto::ExperimentSpec resolve(const Overrides& o) {
  erto::ExperimentSpec spec = o.config.empty() ? erto::parse_config("") : erto::load_config(o.config);
  if (!o.seeds.empty()) spec.seeds = erto::detail::parse_seed_range(o.seeds, 0);
  if (o.seed) spec.seeds = {*o.seed};
  if (!o.strategies.empty()) spec.strategies = o.strategies;
  if (!o.out.empty()) spec.out_dir = o.out;
  spec.validate();
  return spec;
}

void print_summary(const erto::ExperimentSpec& spec, const std::vector<erto::RunRecord>& records) {
  std::printf("%-10s %-8s %6s %10s %10s %10s %10s %8s\n", spec.axis ? std::string(erto::axis_name(*spec.axis)).c_str() : "point",
              "strategy", "seed", "pdr", "delay[s]", "throughput", "residual", "adjust");
  for (const auto& r : records)
    std::printf("%-10s %-8s %6llu %10.6f %10.4f %10.6f %10.6f %8llu\n", erto::format_float(r.key.axis_value).c_str(),
                r.key.strategy.c_str(), static_cast<unsigned long long>(r.key.seed), r.metrics.pdr, r.metrics.mean_delay,
                r.metrics.throughput, r.metrics.residual_energy_ratio,
                static_cast<unsigned long long>(r.metrics.power_adjustments));
}

erto::Progress progress_printer(bool quiet) {
  if (quiet) return {};
  return [](std::size_t done, std::size_t total) {
    std::fprintf(stderr, "\r%zu/%zu runs", done, total);
    if (done == total) std::fprintf(stderr, "\n");
  };
}

int cmd_run(const Overrides& o) {
  auto spec = resolve(o);
  spec.axis.reset();
  if (!o.trace.empty()) {
    if (spec.strategies.size() != 1 || spec.seeds.size() != 1)
      throw erto::ConfigError("--trace needs exactly one strategy and one seed");
    std::filesystem::create_directories(std::filesystem::path(o.trace).parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : std::filesystem::path(o.trace).parent_path());
    std::ofstream trace(o.trace, std::ios::binary);
    if (!trace) throw erto::Error("cannot write " + o.trace);
    trace << "time,packet,event,from,to,cause\n";
    static constexpr const char* kinds[] = {"generated", "hop", "retry", "delivered", "dropped"};
    erto::Simulator sim(spec.at(0, spec.strategies.front(), spec.seeds.front()), [&](const erto::TraceEvent& e) {
      trace << erto::format_float(e.time) << ',' << e.packet << ',' << kinds[static_cast<int>(e.kind)] << ',' << e.from
            << ',' << e.to << ',' << e.cause << '\n';
    });
    std::vector<erto::RunRecord> records{{{0, spec.strategies.front(), spec.seeds.front()}, sim.run()}};
    erto::write_sweep_outputs(spec, records);
    print_summary(spec, records);
    return 0;
  }
  const auto records = erto::run_grid(spec, o.workers, progress_printer(o.quiet));
  erto::write_sweep_outputs(spec, records);
  print_summary(spec, records);
  return 0;
}

int cmd_sweep(const Overrides& o) {
  const auto spec = resolve(o);
  if (!spec.axis) throw erto::ConfigError("sweep: config sets sweep.axis to none; use 'run'");
  if (spec.seeds.size() < 2) throw erto::ConfigError("sweep: need at least two seeds for confidence intervals");
  const auto records = erto::run_grid(spec, o.workers, progress_printer(o.quiet));
  const auto out = erto::write_sweep_outputs(spec, records);
  std::printf("%-10s %-8s %10s %10s %10s %10s\n", std::string(erto::axis_name(*spec.axis)).c_str(), "strategy", "pdr",
              "delay[s]", "throughput", "residual");
  for (std::size_t i = 0; i < out.summary.axis_values.size(); ++i)
    for (const auto& s : out.summary.strategies)
      std::printf("%-10s %-8s %10.6f %10.4f %10.6f %10.6f\n", erto::format_float(out.summary.axis_values[i]).c_str(),
                  s.c_str(), out.summary.at(erto::Metric::Pdr, i, s).mean, out.summary.at(erto::Metric::Delay, i, s).mean,
                  out.summary.at(erto::Metric::Throughput, i, s).mean, out.summary.at(erto::Metric::Residual, i, s).mean);
  std::printf("wrote %zu files to %s\n", out.files.size(), spec.out_dir.c_str());
  return 0;
}

int cmd_front(const std::string& spec_path, const std::string& out_path) {
  const auto fs = spec_path.empty() ? erto::parse_front_spec("") : erto::load_front_spec(spec_path);
  const auto ctx = erto::make_synthetic_context(fs);
  const auto exhaustive = erto::pareto_front_exhaustive(ctx);
  erto::EaParams ea;
  ea.seed = fs.seed;
  const auto evolutionary = erto::pareto_front_evolutionary(ctx, ea);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw erto::Error("cannot write " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  os << "solver,p_ts,n_rel,pdr_sc,p_md,cost\n";
  erto::write_front_csv(os, "exhaustive", exhaustive);
  erto::write_front_csv(os, "evolutionary", evolutionary);
  return 0;
}

int cmd_validate(const Overrides& o) {
  const auto spec = resolve(o);
  nlohmann::ordered_json j = erto::manifest_json(spec, {});
  j.erase("files");
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opportunistic routing simulator with Pareto topology control"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(erto::kVersion));

  Overrides run_o, sweep_o, validate_o;
  std::string front_spec, front_out;

  auto* run = app.add_subcommand("run", "simulate the base config for each strategy and seed");
  add_common(run, run_o);
  run->add_option("--trace", run_o.trace, "per-packet trace CSV (one strategy, one seed)");

  auto* sweep = app.add_subcommand("sweep", "run the configured sweep and write figure CSVs");
  add_common(sweep, sweep_o);

  auto* front = app.add_subcommand("front", "dump exhaustive and evolutionary fronts of a synthetic context");
  front->add_option("--config", front_spec, "YAML context spec")->envname("ERTO_CONFIG");
  front->add_option("--out", front_out, "output CSV (default stdout)")->envname("ERTO_OUT");

  auto* validate = app.add_subcommand("validate", "check a config and print the resolved values");
  add_common(validate, validate_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_o);
    if (*sweep) return cmd_sweep(sweep_o);
    if (*front) return cmd_front(front_spec, front_out);
    if (*validate) return cmd_validate(validate_o);
  } catch (const erto::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
