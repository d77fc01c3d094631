#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "erto/config.hpp"
#include "erto/experiment.hpp"

using namespace erto;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("erto_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ERTO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

constexpr const char* kTinySweep = R"(sim:
  area_w: 400
  area_h: 400
  cbr_pairs: 3
  cbr_rate: 1
  sim_time: 5
sweep:
  axis: node_count
  values: [20, 30]
strategies: [exor, erto]
seeds: "1..2"
)";

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto spec = parse_config("");
  EXPECT_EQ(spec.base.node_count, 100);
  EXPECT_EQ(spec.base.cbr_pairs, 30);
  EXPECT_EQ(spec.base.sim_time, 300.0);
  EXPECT_EQ(spec.axis, Axis::NodeCount);
  EXPECT_EQ(spec.values, (std::vector<double>{40, 60, 80, 100, 120}));
  EXPECT_EQ(spec.seeds.size(), 10u);
  EXPECT_EQ(spec.strategies.size(), 4u);
}

TEST(Config, RangeErrorCarriesLine) {
  try {
    parse_config("sim:\n  sim_time: 10\n  node_count: 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("node_count"), std::string::npos);
  }
}

TEST(Config, UnknownKeySuggestsClosest) {
  try {
    parse_config("sim:\n  nodecount: 50\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("did you mean 'node_count'"), std::string::npos) << e.what();
  }
}

TEST(Config, WrongTypeAndBadStrategy) {
  EXPECT_THROW(parse_config("sim:\n  sim_time: soon\n"), ConfigError);
  EXPECT_THROW(parse_config("strategies: [erto, olsr]\n"), ConfigError);
  EXPECT_THROW(parse_config("sim: [\n"), ConfigError);
}

TEST(Config, SeedsAndSweepForms) {
  const auto a = parse_config("seeds: \"3..5\"\n");
  EXPECT_EQ(a.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  const auto b = parse_config("seeds: [7, 9]\nsweep:\n  axis: cbr_pairs\n");
  EXPECT_EQ(b.seeds, (std::vector<std::uint64_t>{7, 9}));
  EXPECT_EQ(b.values, (std::vector<double>{20, 40, 60, 80, 100}));
  EXPECT_FALSE(parse_config("sweep:\n  axis: none\n").axis);
  EXPECT_THROW(parse_config("seeds: \"5..3\"\n"), ConfigError);
}

TEST(Config, ChannelCalibrationKeepsAnchor) {
  const auto spec = parse_config("channel:\n  eta: 3\n");
  EXPECT_NEAR(transmission_range(0.1, spec.base.ch), 100.0, 1e-9);
}

TEST(Experiment, GridOrderAndPerRunConfig) {
  auto spec = parse_config(kTinySweep);
  const auto keys = grid(spec);
  ASSERT_EQ(keys.size(), 8u);
  EXPECT_EQ(keys[0].axis_value, 20);
  EXPECT_EQ(keys[0].strategy, "exor");
  EXPECT_EQ(keys[1].seed, 2u);
  EXPECT_EQ(spec.at(30, "erto", 2).node_count, 30);
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  const auto spec = parse_config(kTinySweep);
  const auto a = run_grid(spec, 1, {});
  const auto b = run_grid(spec, 3, {});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].metrics, b[i].metrics);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  write(dir / "bad.yaml", "sim:\n  node_count: 1\n");
  write(dir / "typo.yaml", "sim:\n  nodecount: 5\n");
  EXPECT_EQ(cli("validate --config " + (dir / "bad.yaml").string()), 2);
  EXPECT_EQ(cli("validate --config " + (dir / "typo.yaml").string()), 2);
  EXPECT_EQ(cli("validate --config " + (dir / "missing.yaml").string()), 2);
  EXPECT_EQ(cli("run --strategy olsr"), 2);
  EXPECT_EQ(cli("--no-such-flag"), 2);
  EXPECT_EQ(cli("validate"), 0);
}

TEST(Cli, FrontSinglePower) {
  const auto dir = scratch("front");
  write(dir / "ctx.yaml", "seed: 4\nmax_degree: 1\ncandidates: 3\nradio:\n  p_min: 0.3\n  p_max: 0.3\n");
  ASSERT_EQ(cli("front --config " + (dir / "ctx.yaml").string() + " --out " + (dir / "front.csv").string()), 0);
  std::istringstream in(slurp(dir / "front.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "solver,p_ts,n_rel,pdr_sc,p_md,cost");
  int exhaustive = 0, evolutionary = 0;
  while (std::getline(in, line)) {
    if (line.rfind("exhaustive,0.3,1,", 0) == 0) ++exhaustive;
    if (line.rfind("evolutionary,0.3,1,", 0) == 0) ++evolutionary;
  }
  EXPECT_EQ(exhaustive, 1);
  EXPECT_EQ(evolutionary, 1);
  write(dir / "broken.yaml", "candidates: [1\n");
  EXPECT_EQ(cli("front --config " + (dir / "broken.yaml").string()), 2);
}

TEST(Cli, SweepRerunIsByteIdentical) {
  const auto dir = scratch("sweep");
  write(dir / "tiny.yaml", kTinySweep);
  const std::string base = "sweep -q --config " + (dir / "tiny.yaml").string();
  ASSERT_EQ(cli(base + " --workers 1 --out " + (dir / "a").string()), 0);
  ASSERT_EQ(cli(base + " --workers 2 --out " + (dir / "b").string()), 0);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto other = dir / "b" / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
    ++compared;
  }
  EXPECT_EQ(compared, 8u);
  EXPECT_EQ(slurp(dir / "a" / "node_count_pdr.csv").rfind("axis,strategy,mean,std,ci_lo,ci_hi\n", 0), 0u);
}

TEST(Cli, EnvironmentOverrides) {
  const auto dir = scratch("env");
  write(dir / "tiny.yaml", kTinySweep);
  const std::string cmd = "ERTO_SEED=3 ERTO_STRATEGY=tcor ERTO_OUT=" + (dir / "out").string() + " " +
                          std::string(ERTO_CLI_PATH) + " run -q --config " + (dir / "tiny.yaml").string() +
                          " > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const auto runs = slurp(dir / "out" / "runs.csv");
  EXPECT_NE(runs.find("\n0,tcor,3,"), std::string::npos) << runs;
}
