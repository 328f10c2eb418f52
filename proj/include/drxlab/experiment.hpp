#pragma once

// Configuration-file-driven experiment runner: one entry point per
// subcommand, each writing a CSV table.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "analytic_model.hpp"
#include "csv.hpp"
#include "drx_machine.hpp"
#include "optimizer.hpp"
#include "simulator.hpp"
#include "traffic.hpp"

namespace drx {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitIo = 2, kExitInfeasible = 3 };

struct ExperimentConfig {
  // traffic
  std::string traffic_model{"poisson"};
  double lambda_pkt_s{20.0};
  double q{0.5};
  // time
  double tti_ms{1.0};
  // drx (used by `analytic` and `simulate`)
  std::int32_t t_on{8};
  std::optional<std::int32_t> t_i;  // unset: ceil(1 / lambda) TTIs
  std::int32_t t_ss{32};
  std::int32_t t_ls{128};
  std::int32_t t_sc{4};
  // sim
  ItPolicy policy{ItPolicy::Standard};
  double service_multiplier{4.0};
  std::int64_t horizon_ttis{100'000};
  int runs{250};
  std::uint64_t seed{1};
  PowerWeights power_weights{};
  double bucket_depth_pkts{std::numeric_limits<double>::infinity()};
  std::int64_t warmup_ttis{-1};
  unsigned threads{0};
  // opt
  double d_max_ms{10.0};
  std::string method{"genetic"};
  EvaluatorKind evaluator{EvaluatorKind::Analytic};
  ItPolicy opt_policy{ItPolicy::Intelligent};
  int eval_runs{8};
  std::int64_t eval_horizon_ttis{50'000};
  int validate_runs{0};
  int validate_attempts{50};
  GaConfig ga{};
  std::string grid{"reduced"};
  bool search_t_i{false};
  std::string lut_path;
  std::vector<double> d_max_grid{1, 2, 3, 5, 7.5, 10, 15, 20, 30, 40, 50};
  // sweep
  std::vector<double> sweep_lambdas{5, 10, 20, 50};
  std::vector<double> sweep_ttis{1, 0.5, 0.25, 0.125};
  std::vector<ItPolicy> sweep_policies{ItPolicy::Standard, ItPolicy::Intelligent, ItPolicy::Genie};
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double cfg_real(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || std::isnan(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

template <class Int>
Int cfg_int(const std::string& key, const std::string& v) {
  Int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

inline bool cfg_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline std::vector<std::string> cfg_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v + ",") {
    if (c == ',') {
      auto t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

inline ItPolicy cfg_policy(const std::string& key, const std::string& v) {
  if (v == "standard") return ItPolicy::Standard;
  if (v == "intelligent") return ItPolicy::Intelligent;
  if (v == "genie") return ItPolicy::Genie;
  throw ConfigError(key + ": unknown policy '" + v + "'");
}

inline std::vector<double> cfg_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : cfg_list(v)) out.push_back(cfg_real(key, s));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& config_keys() {
  static const std::map<std::string, Setter> keys = {
      {"traffic.model",
       [](auto& c, auto& k, auto& v) {
         if (v != "poisson" && v != "bursty") throw ConfigError(k + ": expected poisson or bursty");
         c.traffic_model = v;
       }},
      {"traffic.lambda_pkt_s", [](auto& c, auto& k, auto& v) { c.lambda_pkt_s = cfg_real(k, v); }},
      {"traffic.q", [](auto& c, auto& k, auto& v) { c.q = cfg_real(k, v); }},
      {"time.tti_ms", [](auto& c, auto& k, auto& v) { c.tti_ms = cfg_real(k, v); }},
      {"drx.t_on", [](auto& c, auto& k, auto& v) { c.t_on = cfg_int<std::int32_t>(k, v); }},
      {"drx.t_i",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto")
           c.t_i.reset();
         else
           c.t_i = cfg_int<std::int32_t>(k, v);
       }},
      {"drx.t_ss", [](auto& c, auto& k, auto& v) { c.t_ss = cfg_int<std::int32_t>(k, v); }},
      {"drx.t_ls", [](auto& c, auto& k, auto& v) { c.t_ls = cfg_int<std::int32_t>(k, v); }},
      {"drx.t_sc", [](auto& c, auto& k, auto& v) { c.t_sc = cfg_int<std::int32_t>(k, v); }},
      {"sim.policy", [](auto& c, auto& k, auto& v) { c.policy = cfg_policy(k, v); }},
      {"sim.service_multiplier", [](auto& c, auto& k, auto& v) { c.service_multiplier = cfg_real(k, v); }},
      {"sim.horizon_ttis", [](auto& c, auto& k, auto& v) { c.horizon_ttis = cfg_int<std::int64_t>(k, v); }},
      {"sim.runs", [](auto& c, auto& k, auto& v) { c.runs = cfg_int<int>(k, v); }},
      {"sim.seed", [](auto& c, auto& k, auto& v) { c.seed = cfg_int<std::uint64_t>(k, v); }},
      {"sim.power_weights",
       [](auto& c, auto& k, auto& v) {
         const auto w = cfg_reals(k, v);
         if (w.size() != 3) throw ConfigError(k + ": expected three weights (active, on, sleep)");
         c.power_weights = PowerWeights{w[0], w[1], w[2]};
       }},
      {"sim.bucket_depth_pkts", [](auto& c, auto& k, auto& v) { c.bucket_depth_pkts = cfg_real(k, v); }},
      {"sim.warmup_ttis",
       [](auto& c, auto& k, auto& v) { c.warmup_ttis = v == "auto" ? -1 : cfg_int<std::int64_t>(k, v); }},
      {"sim.threads", [](auto& c, auto& k, auto& v) { c.threads = cfg_int<unsigned>(k, v); }},
      {"opt.d_max_ms", [](auto& c, auto& k, auto& v) { c.d_max_ms = cfg_real(k, v); }},
      {"opt.method",
       [](auto& c, auto& k, auto& v) {
         if (v != "exhaustive" && v != "genetic") throw ConfigError(k + ": expected exhaustive or genetic");
         c.method = v;
       }},
      {"opt.evaluator",
       [](auto& c, auto& k, auto& v) {
         if (v == "analytic")
           c.evaluator = EvaluatorKind::Analytic;
         else if (v == "simulated")
           c.evaluator = EvaluatorKind::Simulated;
         else
           throw ConfigError(k + ": expected analytic or simulated");
       }},
      {"opt.policy", [](auto& c, auto& k, auto& v) { c.opt_policy = cfg_policy(k, v); }},
      {"opt.eval_runs", [](auto& c, auto& k, auto& v) { c.eval_runs = cfg_int<int>(k, v); }},
      {"opt.eval_horizon_ttis", [](auto& c, auto& k, auto& v) { c.eval_horizon_ttis = cfg_int<std::int64_t>(k, v); }},
      {"opt.validate_runs", [](auto& c, auto& k, auto& v) { c.validate_runs = cfg_int<int>(k, v); }},
      {"opt.validate_attempts", [](auto& c, auto& k, auto& v) { c.validate_attempts = cfg_int<int>(k, v); }},
      {"opt.generations", [](auto& c, auto& k, auto& v) { c.ga.generations = cfg_int<int>(k, v); }},
      {"opt.population", [](auto& c, auto& k, auto& v) { c.ga.population = cfg_int<int>(k, v); }},
      {"opt.mutation_rate", [](auto& c, auto& k, auto& v) { c.ga.mutation_rate = cfg_real(k, v); }},
      {"opt.crossover_rate", [](auto& c, auto& k, auto& v) { c.ga.crossover_rate = cfg_real(k, v); }},
      {"opt.tournament_size", [](auto& c, auto& k, auto& v) { c.ga.tournament_size = cfg_int<int>(k, v); }},
      {"opt.elitism", [](auto& c, auto& k, auto& v) { c.ga.elitism = cfg_int<int>(k, v); }},
      {"opt.stall_generations", [](auto& c, auto& k, auto& v) { c.ga.stall_generations = cfg_int<int>(k, v); }},
      {"opt.grid",
       [](auto& c, auto& k, auto& v) {
         if (v != "reduced" && v != "full") throw ConfigError(k + ": expected reduced or full");
         c.grid = v;
       }},
      {"opt.search_t_i", [](auto& c, auto& k, auto& v) { c.search_t_i = cfg_bool(k, v); }},
      {"opt.lut_path", [](auto& c, auto&, auto& v) { c.lut_path = v; }},
      {"opt.d_max_grid", [](auto& c, auto& k, auto& v) { c.d_max_grid = cfg_reals(k, v); }},
      {"sweep.lambda_pkt_s", [](auto& c, auto& k, auto& v) { c.sweep_lambdas = cfg_reals(k, v); }},
      {"sweep.tti_ms", [](auto& c, auto& k, auto& v) { c.sweep_ttis = cfg_reals(k, v); }},
      {"sweep.policies",
       [](auto& c, auto& k, auto& v) {
         c.sweep_policies.clear();
         for (const auto& s : cfg_list(v)) c.sweep_policies.push_back(cfg_policy(k, s));
         if (c.sweep_policies.empty()) throw ConfigError(k + ": empty list");
       }},
  };
  return keys;
}

}  // namespace detail

inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& keys = detail::config_keys();
  const auto it = keys.find(key);
  if (it == keys.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(cfg, key, value);
}

inline void check_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(c.lambda_pkt_s >= 0) || !std::isfinite(c.lambda_pkt_s)) fail("traffic.lambda_pkt_s must be >= 0");
  if (!(c.q >= 0 && c.q < 1)) fail("traffic.q must lie in [0, 1)");
  if (!(c.tti_ms > 0) || !std::isfinite(c.tti_ms)) fail("time.tti_ms must be positive");
  if (c.runs < 2) fail("sim.runs must be >= 2");
  if (c.horizon_ttis < 10'000) fail("sim.horizon_ttis must be >= 10000");
  if (!(c.service_multiplier > 1)) fail("sim.service_multiplier must exceed 1");
  if (!(c.d_max_ms >= 0)) fail("opt.d_max_ms must be >= 0");
  if (c.eval_runs < 2) fail("opt.eval_runs must be >= 2");
  if (c.eval_horizon_ttis < 10'000) fail("opt.eval_horizon_ttis must be >= 10000");
  if (c.validate_runs != 0 && c.validate_runs < 2) fail("opt.validate_runs must be 0 or >= 2");
  if (c.validate_attempts < 1) fail("opt.validate_attempts must be >= 1");
  for (double x : c.sweep_lambdas)
    if (!(x > 0)) fail("sweep.lambda_pkt_s entries must be positive");
  for (double x : c.sweep_ttis)
    if (!(x > 0)) fail("sweep.tti_ms entries must be positive");
  try {
    validate(c.ga);
  } catch (const std::invalid_argument& e) {
    fail(std::string("opt: ") + e.what());
  }
}

// Parses `section.key = value` lines; '#' starts a comment.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = detail::trim(std::string_view(body).substr(0, eq));
    const auto value = detail::trim(std::string_view(body).substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  check_config(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Scenario assembly

inline TrafficSpec make_traffic(const ExperimentConfig& c, double lambda_pkt_s, double tti_ms) {
  const double lambda = per_tti_rate(lambda_pkt_s, TimeBase{tti_ms});
  if (c.traffic_model == "poisson") return PoissonTraffic{lambda};
  const double p = activation_from_rate(lambda, c.q);
  if (!(p > 0)) throw ConfigError("bursty traffic needs a positive rate");
  return BurstyTraffic{p, c.q};
}

// Inactivity timer equal to the mean inter-arrival time, ceil(1 / lambda).
inline std::int32_t mean_gap_ttis(double lambda_per_tti) {
  if (!(lambda_per_tti > 0)) throw ConfigError("inactivity timer 'auto' needs a positive arrival rate");
  return static_cast<std::int32_t>(std::max(1.0, std::ceil(1.0 / lambda_per_tti - 1e-9)));
}

inline SearchSpace make_space(const ExperimentConfig& c, double lambda_per_tti) {
  const auto t_i = c.t_i ? *c.t_i : mean_gap_ttis(lambda_per_tti);
  SearchSpace s = c.grid == "full" ? SearchSpace::full(t_i) : SearchSpace::reduced(t_i);
  s.t_on = c.t_on;
  if (c.search_t_i) {
    const auto hi = mean_gap_ttis(lambda_per_tti);
    const auto stride = c.grid == "full" ? 1 : std::max(1, hi / 8);
    s.t_i_range = IntRange{1, hi, stride};
  }
  return s;
}

inline SimConfig make_sim(const ExperimentConfig& c, const TrafficSpec& traffic, double tti_ms, const DrxParams& p,
                          ItPolicy policy) {
  SimConfig s;
  s.traffic = traffic;
  s.params = p;
  s.time_base = TimeBase{tti_ms};
  s.it_policy = policy;
  s.service_multiplier = c.service_multiplier;
  s.horizon_ttis = c.horizon_ttis;
  s.seed = c.seed;
  s.power_weights = c.power_weights;
  s.bucket_depth_pkts = c.bucket_depth_pkts;
  s.warmup_ttis = c.warmup_ttis;
  return s;
}

struct CellOptimum {
  OptResult result;
  int validation_attempts{0};
};

// Optimizes one (lambda, TTI, d_max) cell with the configured method and
// evaluator, followed by simulation-based validation when enabled.
inline CellOptimum optimize_cell(const ExperimentConfig& c, double lambda_pkt_s, double tti_ms, double d_max_ms) {
  const auto traffic = make_traffic(c, lambda_pkt_s, tti_ms);
  const auto space = make_space(c, mean_rate(traffic));
  EvalContext ctx;
  ctx.traffic = traffic;
  ctx.time_base = TimeBase{tti_ms};
  ctx.kind = c.evaluator;
  ctx.sim = make_sim(c, traffic, tti_ms, DrxParams{}, c.opt_policy);
  ctx.sim.horizon_ttis = c.eval_horizon_ttis;
  ctx.sim_runs = c.eval_runs;
  ctx.threads = c.threads;

  std::vector<ScoredPoint> trace;
  auto* tr = c.validate_runs > 0 ? &trace : nullptr;
  CellOptimum out;
  out.result = c.method == "exhaustive" ? exhaustive_search(space, d_max_ms, ctx, tr)
                                        : genetic_search(space, d_max_ms, c.ga, ctx, c.seed, tr);
  if (c.validate_runs > 0) {
    ValidationSettings v;
    v.runs = c.validate_runs;
    v.horizon_ttis = c.horizon_ttis;
    v.seed = mix64(c.seed ^ 0x76616c6964617465ULL);
    v.max_attempts = c.validate_attempts;
    auto validated = validate_by_simulation(std::move(trace), d_max_ms, ctx, v, out.result.evaluations);
    out.validation_attempts = validated.attempts;
    if (validated.attempts > 0) out.result = validated.result;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

enum class Subcommand { Analytic, Simulate, Optimize, Sweep, Cdf, DelaySweep };

inline std::optional<Subcommand> parse_subcommand(std::string_view s) {
  if (s == "analytic") return Subcommand::Analytic;
  if (s == "simulate") return Subcommand::Simulate;
  if (s == "optimize") return Subcommand::Optimize;
  if (s == "sweep") return Subcommand::Sweep;
  if (s == "cdf") return Subcommand::Cdf;
  if (s == "delay-sweep") return Subcommand::DelaySweep;
  return std::nullopt;
}

inline std::string model_name(const TrafficSpec& t) { return is_bursty(t) ? "bursty" : "poisson"; }

inline DrxParams config_params(const ExperimentConfig& c, const TrafficSpec& traffic) {
  DrxParams p;
  p.t_on = c.t_on;
  p.t_i = c.t_i ? *c.t_i : mean_gap_ttis(mean_rate(traffic));
  p.t_ss = c.t_ss;
  p.t_ls = c.t_ls;
  p.t_sc = c.t_sc;
  return p;
}

// Fixed column order of the Monte Carlo result rows.
inline const std::vector<std::string>& result_row_header() {
  static const std::vector<std::string> h = {
      "model",          "lambda_pkt_s",   "q",           "tti_ms",        "d_max_ms",         "policy",
      "method",         "evaluator",      "t_on",        "t_i",           "t_ss",             "t_ls",
      "t_sc",           "feasible",       "evaluations", "runs",          "power",            "power_ci95",
      "sleep_fraction", "sleep_ci95",     "mean_delay_ms", "delay_ci95",  "sleep_delay_ms",   "analytic_ps",
      "analytic_delay_ms", "undelivered"};
  return h;
}

inline std::vector<CsvField> result_row(const ExperimentConfig& c, const TrafficSpec& traffic, double lambda_pkt_s,
                                        double tti_ms, double d_max_ms, ItPolicy policy, const std::string& method,
                                        const std::string& evaluator, const DrxParams& p, bool feasible,
                                        std::int64_t evaluations, const MonteCarloResult& mc) {
  const auto a = analyze(p, traffic, TimeBase{tti_ms});
  return {model_name(traffic),
          lambda_pkt_s,
          is_bursty(traffic) ? c.q : 0.0,
          tti_ms,
          d_max_ms,
          std::string(policy_name(policy)),
          method,
          evaluator,
          std::int64_t{p.t_on},
          std::int64_t{p.t_i},
          std::int64_t{p.t_ss},
          std::int64_t{p.t_ls},
          std::int64_t{p.t_sc},
          std::int64_t{feasible ? 1 : 0},
          evaluations,
          static_cast<std::int64_t>(mc.runs.size()),
          mc.power.mean,
          mc.power.ci95,
          mc.sleep_fraction.mean,
          mc.sleep_fraction.ci95,
          mc.mean_delay_ms.mean,
          mc.mean_delay_ms.ci95,
          mc.mean_sleep_delay_ms.mean,
          a.ps,
          a.mean_delay_ms,
          mc.packets_undelivered};
}

inline std::filesystem::path sibling(const std::filesystem::path& out, std::string_view suffix) {
  auto p = out;
  p += suffix;
  return p;
}

inline CsvTable run_analytic(const ExperimentConfig& c) {
  const auto traffic = make_traffic(c, c.lambda_pkt_s, c.tti_ms);
  const auto p = config_params(c, traffic);
  auto chain = build_chain(p, traffic);
  chain.pi = steady_state(chain);
  const auto closed = closed_form_steady_state(chain);
  const auto ps = power_saving(chain);
  const auto d_tti = mean_delay(chain, p, traffic);
  CsvTable t;
  t.header = {"model", "lambda_pkt_s", "q",  "tti_ms", "t_on",           "t_i",           "t_ss",
              "t_ls",  "t_sc",         "ps", "mean_delay_ttis", "mean_delay_ms", "closed_form_max_abs_diff",
              "d_max_ms", "markov_bound"};
  const double d_ms = d_tti * c.tti_ms;
  t.add({model_name(traffic), c.lambda_pkt_s, is_bursty(traffic) ? c.q : 0.0, c.tti_ms, std::int64_t{p.t_on},
         std::int64_t{p.t_i}, std::int64_t{p.t_ss}, std::int64_t{p.t_ls}, std::int64_t{p.t_sc}, ps, d_tti, d_ms,
         (closed - chain.pi).cwiseAbs().maxCoeff(), c.d_max_ms,
         d_ms > 0 && c.d_max_ms > 0 ? markov_delay_bound(d_ms, c.d_max_ms) : 0.0});
  return t;
}

inline int run_simulate(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto traffic = make_traffic(c, c.lambda_pkt_s, c.tti_ms);
  const auto p = config_params(c, traffic);
  const auto sim = make_sim(c, traffic, c.tti_ms, p, c.policy);
  const auto mc = monte_carlo(sim, c.runs, c.threads);
  CsvTable t;
  t.header = result_row_header();
  t.add(result_row(c, traffic, c.lambda_pkt_s, c.tti_ms, c.d_max_ms, c.policy, "fixed", "none", p, true, 0, mc));
  emit_csv(t, out);
  CsvTable d;
  d.header = {"delay_ms"};
  for (double x : mc.pooled_delays_ms) d.add({x});
  emit_csv(d, sibling(out, ".delays.csv"));
  return kExitOk;
}

inline int run_optimize(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto traffic = make_traffic(c, c.lambda_pkt_s, c.tti_ms);
  const auto cell = optimize_cell(c, c.lambda_pkt_s, c.tti_ms, c.d_max_ms);
  const auto& r = cell.result;
  CsvTable t;
  t.header = {"model", "lambda_pkt_s", "q",    "tti_ms", "d_max_ms", "method",        "evaluator",
              "t_on",  "t_i",          "t_ss", "t_ls",   "t_sc",     "ps",            "mean_delay_ms",
              "feasible", "evaluations", "validation_attempts"};
  t.add({model_name(traffic), c.lambda_pkt_s, is_bursty(traffic) ? c.q : 0.0, c.tti_ms, c.d_max_ms, c.method,
         std::string(evaluator_name(r.evaluator_kind)), std::int64_t{r.best.t_on}, std::int64_t{r.best.t_i},
         std::int64_t{r.best.t_ss}, std::int64_t{r.best.t_ls}, std::int64_t{r.best.t_sc}, r.ps, r.mean_delay_ms,
         std::int64_t{r.feasible ? 1 : 0}, r.evaluations, std::int64_t{cell.validation_attempts}});
  emit_csv(t, out);
  const std::filesystem::path lut_path = c.lut_path.empty() ? sibling(out, ".lut.csv") : std::filesystem::path(c.lut_path);
  LookupTable lut(lut_path);
  lut.put(LutKey{model_name(traffic), c.lambda_pkt_s, is_bursty(traffic) ? c.q : 0.0, c.tti_ms, c.d_max_ms}, r);
  return r.feasible ? kExitOk : kExitInfeasible;
}

inline CsvTable run_sweep(const ExperimentConfig& c) {
  CsvTable t;
  t.header = result_row_header();
  for (double lambda : c.sweep_lambdas)
    for (double tti : c.sweep_ttis) {
      const auto traffic = make_traffic(c, lambda, tti);
      const auto cell = optimize_cell(c, lambda, tti, c.d_max_ms);
      for (auto policy : c.sweep_policies) {
        const auto mc = monte_carlo(make_sim(c, traffic, tti, cell.result.best, policy), c.runs, c.threads);
        t.add(result_row(c, traffic, lambda, tti, c.d_max_ms, policy, c.method,
                         std::string(evaluator_name(cell.result.evaluator_kind)), cell.result.best,
                         cell.result.feasible, cell.result.evaluations, mc));
      }
    }
  return t;
}

inline CsvTable run_cdf(const ExperimentConfig& c) {
  const auto traffic = make_traffic(c, c.lambda_pkt_s, c.tti_ms);
  const auto cell = optimize_cell(c, c.lambda_pkt_s, c.tti_ms, c.d_max_ms);
  CsvTable t;
  t.header = {"policy", "delay_ms", "cdf"};
  for (auto policy : {ItPolicy::Standard, ItPolicy::Intelligent}) {
    const auto mc = monte_carlo(make_sim(c, traffic, c.tti_ms, cell.result.best, policy), c.runs, c.threads);
    if (mc.pooled_delays_ms.empty()) continue;
    for (const auto& pt : empirical_cdf(mc.pooled_delays_ms))
      t.add({std::string(policy_name(policy)), pt.value, pt.probability});
  }
  return t;
}

inline CsvTable run_delay_sweep(const ExperimentConfig& c) {
  const auto traffic = make_traffic(c, c.lambda_pkt_s, c.tti_ms);
  CsvTable t;
  t.header = {"d_max_ms", "feasible", "t_i", "t_ss", "t_ls", "t_sc", "power_standard", "power_intelligent",
              "relative_power", "saving", "mean_delay_standard_ms", "mean_delay_intelligent_ms"};
  for (double d_max : c.d_max_grid) {
    const auto cell = optimize_cell(c, c.lambda_pkt_s, c.tti_ms, d_max);
    const auto& p = cell.result.best;
    const auto std_mc = monte_carlo(make_sim(c, traffic, c.tti_ms, p, ItPolicy::Standard), c.runs, c.threads);
    const auto int_mc = monte_carlo(make_sim(c, traffic, c.tti_ms, p, ItPolicy::Intelligent), c.runs, c.threads);
    const double rel = int_mc.power.mean / std_mc.power.mean;
    t.add({d_max, std::int64_t{cell.result.feasible ? 1 : 0}, std::int64_t{p.t_i}, std::int64_t{p.t_ss},
           std::int64_t{p.t_ls}, std::int64_t{p.t_sc}, std_mc.power.mean, int_mc.power.mean, rel, 1.0 - rel,
           std_mc.mean_delay_ms.mean, int_mc.mean_delay_ms.mean});
  }
  return t;
}

// Runs one subcommand and maps failures onto the documented exit codes.
inline int run_experiment(Subcommand cmd, const ExperimentConfig& config, const std::filesystem::path& out,
                          std::ostream& err = std::cerr) {
  try {
    check_config(config);
    switch (cmd) {
      case Subcommand::Analytic: emit_csv(run_analytic(config), out); return kExitOk;
      case Subcommand::Simulate: return run_simulate(config, out);
      case Subcommand::Optimize: return run_optimize(config, out);
      case Subcommand::Sweep: emit_csv(run_sweep(config), out); return kExitOk;
      case Subcommand::Cdf: emit_csv(run_cdf(config), out); return kExitOk;
      case Subcommand::DelaySweep: emit_csv(run_delay_sweep(config), out); return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const LutIoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InfeasibleRate& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace drx
