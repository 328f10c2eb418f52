#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "drxlab/experiment.hpp"

namespace {

using namespace drx;
namespace fs = std::filesystem;

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("drxlab_exp_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DRXLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Csv, HeaderOnlyTable) {
  CsvTable t;
  t.header = {"a", "b"};
  EXPECT_EQ(t.str(), "a,b\n");
  EXPECT_THROW(t.add({std::int64_t{1}}), std::logic_error);
}

TEST(Csv, WriteAndReadBack) {
  const auto path = scratch() / "t.csv";
  CsvTable t;
  t.header = {"name", "n", "x"};
  t.add({std::string("poisson"), std::int64_t{-3}, 0.1 + 0.2});
  t.add({std::string("bursty"), std::int64_t{7}, std::numeric_limits<double>::infinity()});
  emit_csv(t, path);
  EXPECT_EQ(slurp(path), "name,n,x\npoisson,-3,0.3\nbursty,7,inf\n");
  const auto back = read_csv(path);
  EXPECT_EQ(back.header, t.header);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(std::get<std::string>(back.rows[1][0]), "bursty");
  EXPECT_THROW(emit_csv(t, scratch() / "missing_dir" / "t.csv"), IoError);
}

TEST(Config, ParsesKeysAndComments) {
  const auto c = parse_config(
      "# scenario\n"
      "traffic.model = bursty\n"
      "traffic.lambda_pkt_s = 10   # per second\n"
      "traffic.q = 0.3\n"
      "time.tti_ms = 0.25\n"
      "drx.t_i = 40\n"
      "sim.policy = genie\n"
      "sim.power_weights = 1, 0.8, 0.01\n"
      "sim.bucket_depth_pkts = inf\n"
      "opt.evaluator = simulated\n"
      "opt.d_max_grid = 1, 5, 50\n"
      "sweep.policies = standard, intelligent\n");
  EXPECT_EQ(c.traffic_model, "bursty");
  EXPECT_DOUBLE_EQ(c.lambda_pkt_s, 10.0);
  EXPECT_DOUBLE_EQ(c.tti_ms, 0.25);
  EXPECT_EQ(c.t_i, 40);
  EXPECT_EQ(c.policy, ItPolicy::Genie);
  EXPECT_DOUBLE_EQ(c.power_weights.on, 0.8);
  EXPECT_TRUE(std::isinf(c.bucket_depth_pkts));
  EXPECT_EQ(c.evaluator, EvaluatorKind::Simulated);
  EXPECT_EQ(c.d_max_grid, (std::vector<double>{1, 5, 50}));
  EXPECT_EQ(c.sweep_policies.size(), 2u);
}

TEST(Config, Defaults) {
  const auto c = parse_config("");
  EXPECT_DOUBLE_EQ(c.d_max_ms, 10.0);
  EXPECT_EQ(c.ga.generations, 200);
  EXPECT_EQ(c.ga.population, 50);
  EXPECT_DOUBLE_EQ(c.q, 0.5);
  EXPECT_EQ(c.t_on, 8);
  EXPECT_EQ(c.runs, 250);
  EXPECT_EQ(c.sweep_lambdas.size() * c.sweep_ttis.size() * c.sweep_policies.size(), 48u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("traffic.rate = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("traffic.lambda_pkt_s 3\n"), ConfigError);
  EXPECT_THROW(parse_config("traffic.lambda_pkt_s = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("drx.t_ss = 3.5\n"), ConfigError);
  EXPECT_THROW(parse_config("sim.policy = lazy\n"), ConfigError);
  EXPECT_THROW(parse_config("traffic.q = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("sim.runs = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("sim.power_weights = 1, 2\n"), ConfigError);
  try {
    parse_config("\n\nopt.grid = tiny\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Scenario, InactivityTimerDefaultsToMeanGap) {
  const auto c = parse_config("");
  EXPECT_EQ(mean_gap_ttis(0.02), 50);
  EXPECT_EQ(mean_gap_ttis(0.0025), 400);
  EXPECT_EQ(mean_gap_ttis(3.0), 1);
  EXPECT_EQ(config_params(c, make_traffic(c, 20, 1)).t_i, 50);
  EXPECT_THROW(mean_gap_ttis(0.0), ConfigError);
}

TEST(RunExperiment, AnalyticRow) {
  auto c = parse_config("drx.t_ss = 32\ndrx.t_ls = 640\ntraffic.lambda_pkt_s = 0\ndrx.t_i = 50\n");
  const auto t = run_analytic(c);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_NEAR(std::get<double>(t.rows[0][9]), 640.0 / 648.0, 1e-12);
}

TEST(RunExperiment, ExitCodes) {
  const auto dir = scratch();
  std::ostringstream err;
  auto c = parse_config("");
  EXPECT_EQ(run_experiment(Subcommand::Analytic, c, dir / "a.csv", err), kExitOk);
  EXPECT_EQ(run_experiment(Subcommand::Analytic, c, dir / "nope" / "a.csv", err), kExitIo);
  c.q = 2.0;
  EXPECT_EQ(run_experiment(Subcommand::Analytic, c, dir / "a.csv", err), kExitConfig);
  c = parse_config("opt.d_max_ms = 0.5\nopt.method = exhaustive\n");
  EXPECT_EQ(run_experiment(Subcommand::Optimize, c, dir / "o.csv", err), kExitInfeasible);
  const auto rows = read_csv(dir / "o.csv");
  ASSERT_EQ(rows.rows.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "o.csv.lut.csv"));
}

TEST(Cli, ExitCodesAndFlags) {
  const auto dir = scratch();
  const auto cfg = dir / "c.cfg";
  std::ofstream(cfg) << "sim.horizon_ttis = 20000\n";
  const auto bad = dir / "bad.cfg";
  std::ofstream(bad) << "sim.colour = blue\n";
  const auto out = (dir / "cli.csv").string();
  EXPECT_EQ(run_cli("analytic --config " + cfg.string() + " --out " + out), 0);
  EXPECT_EQ(run_cli("analytic --config " + bad.string() + " --out " + out), 1);
  EXPECT_EQ(run_cli("analytic --config " + (dir / "absent.cfg").string() + " --out " + out), 1);
  EXPECT_EQ(run_cli("analytic --out " + (dir / "no" / "x.csv").string()), 2);
  EXPECT_EQ(run_cli("frobnicate --out " + out), 1);
  EXPECT_EQ(run_cli("optimize --grid tiny --out " + out), 1);
  const auto sim = (dir / "sim.csv").string();
  EXPECT_EQ(run_cli("simulate --config " + cfg.string() + " --runs 3 --seed 5 --out " + sim), 0);
  const auto table = read_csv(sim);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(std::get<std::string>(table.rows[0][15]), "3");
  EXPECT_TRUE(fs::exists(sim + ".delays.csv"));
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto dir = scratch();
  const auto cfg = dir / "d.cfg";
  std::ofstream(cfg) << "sim.horizon_ttis = 20000\nsim.policy = intelligent\n";
  const auto a = (dir / "r1.csv").string(), b = (dir / "r2.csv").string();
  ASSERT_EQ(run_cli("simulate --config " + cfg.string() + " --runs 4 --out " + a), 0);
  ASSERT_EQ(run_cli("simulate --config " + cfg.string() + " --runs 4 --out " + b), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a + ".delays.csv"), slurp(b + ".delays.csv"));
}

}  // namespace
