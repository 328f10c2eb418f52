// drxlab: DRX analysis, simulation and optimization experiments.
//
//   drxlab <subcommand> --config run.cfg --out result.csv [--seed N] [--runs N] [--grid reduced|full]

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "drxlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DRX power/latency experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::string> grid;

  const std::pair<const char*, const char*> commands[] = {
      {"analytic", "closed-model power saving and mean delay"},
      {"simulate", "Monte Carlo simulation of a fixed configuration"},
      {"optimize", "search DRX timers under the delay budget"},
      {"sweep", "optimize and simulate over arrival rate x TTI x policy"},
      {"cdf", "pooled delay CDF for standard and intelligent IT"},
      {"delay-sweep", "relative power versus delay budget"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "config file (section.key = value)");
    sub->add_option("--out", out_path, "output CSV path")->required();
    sub->add_option("--seed", seed, "base random seed");
    sub->add_option("--runs", runs, "Monte Carlo runs");
    sub->add_option("--grid", grid, "search grid")->check(CLI::IsMember({"reduced", "full"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : drx::kExitConfig;
  }

  const auto cmd = drx::parse_subcommand(app.get_subcommands().front()->get_name());
  drx::ExperimentConfig config;
  try {
    if (!config_path.empty()) config = drx::load_config(config_path);
    if (seed) config.seed = *seed;
    if (runs) config.runs = *runs;
    if (grid) config.grid = *grid;
  } catch (const drx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return drx::kExitConfig;
  }
  return drx::run_experiment(*cmd, config, out_path);
}
