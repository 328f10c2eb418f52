#pragma once

// Constrained DRX configuration search: maximize the power-saving factor
// subject to a mean-delay budget, by exhaustive enumeration or a genetic
// algorithm, plus a persisted lookup table of optimized configurations.

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "analytic_model.hpp"
#include "drx_machine.hpp"
#include "simulator.hpp"
#include "traffic.hpp"

namespace drx {

struct IntRange {
  std::int32_t lo{1};
  std::int32_t hi{1};
  std::int32_t stride{1};

  std::vector<std::int32_t> values() const {
    std::vector<std::int32_t> v;
    if (stride < 1) throw std::invalid_argument("range stride must be >= 1");
    for (std::int32_t x = lo; x <= hi; x += stride) v.push_back(x);
    return v;
  }
};

// Parameter grid. T_ls runs from T_ss (exclusive unless equal cycles are
// allowed) up to t_ls_max in steps of t_ls_stride; T_I is fixed unless a
// search range is given.
struct SearchSpace {
  IntRange t_ss{32, 160, 1};
  std::int32_t t_ls_max{640};
  std::int32_t t_ls_stride{1};
  std::vector<std::int32_t> t_sc_values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  std::int32_t t_on{8};
  std::int32_t t_i_fixed{50};
  std::optional<IntRange> t_i_range;
  bool allow_equal_cycles{false};

  // Full stride-1 grid.
  static SearchSpace full(std::int32_t t_i) {
    SearchSpace s;
    s.t_i_fixed = t_i;
    return s;
  }

  // Strides 16 (T_ss) and 32 (T_ls), T_sc in {1, 2, 4, 8, 16}.
  static SearchSpace reduced(std::int32_t t_i) {
    SearchSpace s;
    s.t_ss.stride = 16;
    s.t_ls_stride = 32;
    s.t_sc_values = {1, 2, 4, 8, 16};
    s.t_i_fixed = t_i;
    return s;
  }

  std::vector<std::int32_t> t_ls_values(std::int32_t t_ss) const {
    std::vector<std::int32_t> v;
    for (std::int32_t x = allow_equal_cycles ? t_ss : t_ss + t_ls_stride; x <= t_ls_max; x += t_ls_stride)
      v.push_back(x);
    return v;
  }

  std::vector<std::int32_t> t_i_values() const {
    return t_i_range ? t_i_range->values() : std::vector<std::int32_t>{t_i_fixed};
  }

  std::int64_t count() const {
    std::int64_t per_ss = 0;
    for (auto ss : t_ss.values()) per_ss += static_cast<std::int64_t>(t_ls_values(ss).size());
    return per_ss * static_cast<std::int64_t>(t_sc_values.size()) *
           static_cast<std::int64_t>(t_i_values().size());
  }

  DrxParams make(std::int32_t t_ss_v, std::int32_t t_ls_v, std::int32_t t_sc_v, std::int32_t t_i_v) const {
    DrxParams p;
    p.t_on = t_on;
    p.t_i = t_i_v;
    p.t_ss = t_ss_v;
    p.t_ls = t_ls_v;
    p.t_sc = t_sc_v;
    p.allow_equal_cycles = allow_equal_cycles;
    return p;
  }
};

// Lazy view over every grid point, ordered lexicographically by
// (t_ss, t_ls, t_sc, t_i).
class GridView {
 public:
  explicit GridView(SearchSpace space)
      : space_(std::move(space)), ss_(space_.t_ss.values()), ti_(space_.t_i_values()) {
    for (auto ss : ss_) ls_.push_back(space_.t_ls_values(ss));
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = DrxParams;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = DrxParams;

    iterator() = default;
    iterator(const GridView* view, bool end) : view_(view) {
      if (end || view_->space_.t_sc_values.empty() || view_->ti_.empty()) {
        i_ss_ = view_->ss_.size();
      } else {
        skip_empty();
      }
    }
    DrxParams operator*() const {
      const auto ss = view_->ss_[i_ss_];
      return view_->space_.make(ss, view_->ls_[i_ss_][i_ls_], view_->space_.t_sc_values[i_sc_], view_->ti_[i_ti_]);
    }
    iterator& operator++() {
      if (++i_ti_ < view_->ti_.size()) return *this;
      i_ti_ = 0;
      if (++i_sc_ < view_->space_.t_sc_values.size()) return *this;
      i_sc_ = 0;
      if (++i_ls_ < view_->ls_[i_ss_].size()) return *this;
      i_ls_ = 0;
      ++i_ss_;
      skip_empty();
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.i_ss_ == b.i_ss_ && a.i_ls_ == b.i_ls_ && a.i_sc_ == b.i_sc_ && a.i_ti_ == b.i_ti_;
    }

   private:
    void skip_empty() {
      while (i_ss_ < view_->ss_.size() && view_->ls_[i_ss_].empty()) ++i_ss_;
    }
    const GridView* view_{nullptr};
    std::size_t i_ss_{0}, i_ls_{0}, i_sc_{0}, i_ti_{0};
  };

  iterator begin() const { return iterator(this, false); }
  iterator end() const { return iterator(this, true); }
  std::int64_t size() const { return space_.count(); }
  const SearchSpace& space() const { return space_; }

 private:
  SearchSpace space_;
  std::vector<std::int32_t> ss_;
  std::vector<std::vector<std::int32_t>> ls_;
  std::vector<std::int32_t> ti_;
};

inline GridView enumerate_space(const SearchSpace& space) { return GridView(space); }

// ---------------------------------------------------------------------------
// Evaluation

enum class EvaluatorKind { Analytic, Simulated };

inline constexpr std::string_view evaluator_name(EvaluatorKind k) {
  return k == EvaluatorKind::Analytic ? "analytic" : "simulated";
}

struct EvalContext {
  TrafficSpec traffic{PoissonTraffic{0.02}};
  TimeBase time_base{};
  EvaluatorKind kind{EvaluatorKind::Analytic};
  // Simulated evaluation only: scenario template (params overwritten per
  // point) and run count.
  SimConfig sim{};
  int sim_runs{10};
  unsigned threads{0};
};

struct Evaluation {
  double ps{0.0};
  double mean_delay_ms{0.0};
};

inline Evaluation evaluate(const DrxParams& params, const EvalContext& ctx) {
  validate(params);
  if (ctx.kind == EvaluatorKind::Analytic) {
    const auto r = analyze(params, ctx.traffic, ctx.time_base);
    return {r.ps, r.mean_delay_ms};
  }
  SimConfig c = ctx.sim;
  c.traffic = ctx.traffic;
  c.time_base = ctx.time_base;
  c.params = params;
  // Runs inside a search are evaluated on one thread each; the search
  // parallelizes across points instead.
  const auto mc = monte_carlo(c, ctx.sim_runs, 1);
  const double delay = std::isfinite(mc.mean_delay_ms.mean) ? mc.mean_delay_ms.mean : 0.0;
  return {mc.sleep_fraction.mean, delay};
}

struct OptResult {
  DrxParams best{};
  double ps{0.0};
  double mean_delay_ms{0.0};
  bool feasible{false};
  std::int64_t evaluations{0};
  EvaluatorKind evaluator_kind{EvaluatorKind::Analytic};
};

// One evaluated grid point.
struct ScoredPoint {
  DrxParams params{};
  double ps{-1.0};
  double delay{std::numeric_limits<double>::infinity()};  // ms
  bool feasible{false};
  bool valid{false};
};

namespace detail {

using Candidate = ScoredPoint;

inline auto tuple_key(const DrxParams& p) { return std::make_tuple(p.t_ss, p.t_ls, p.t_sc, p.t_i, p.t_on); }

// Strict "a is preferred over b": feasible first; among feasible, higher PS,
// then lower delay; among infeasible, lower delay, then higher PS; finally
// the lexicographically smaller tuple.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.valid != b.valid) return a.valid;
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) {
    if (a.ps != b.ps) return a.ps > b.ps;
    if (a.delay != b.delay) return a.delay < b.delay;
  } else {
    if (a.delay != b.delay) return a.delay < b.delay;
    if (a.ps != b.ps) return a.ps > b.ps;
  }
  return tuple_key(a.params) < tuple_key(b.params);
}

inline Candidate score(const DrxParams& p, double d_max_ms, const EvalContext& ctx) {
  const auto e = evaluate(p, ctx);
  return Candidate{p, e.ps, e.mean_delay_ms, e.mean_delay_ms <= d_max_ms && cycles_ordered(p), true};
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned k = std::min<std::size_t>(threads == 0 ? default_thread_count() : threads, std::max<std::size_t>(n, 1));
  if (k <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < k; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

inline OptResult to_result(const Candidate& c, std::int64_t evaluations, EvaluatorKind kind) {
  OptResult r;
  r.best = c.params;
  r.ps = c.ps;
  r.mean_delay_ms = c.delay;
  r.feasible = c.feasible;
  r.evaluations = evaluations;
  r.evaluator_kind = kind;
  return r;
}

}  // namespace detail

// Evaluates every grid point. Points are scored in parallel blocks and
// reduced with a total order, so the result does not depend on threading.
// When `trace` is given it receives every scored point in grid order.
inline OptResult exhaustive_search(const SearchSpace& space, double d_max_ms, const EvalContext& ctx,
                                   std::vector<ScoredPoint>* trace = nullptr) {
  const GridView grid(space);
  std::vector<DrxParams> points(grid.begin(), grid.end());
  if (points.empty()) {
    OptResult r;
    r.evaluator_kind = ctx.kind;
    return r;
  }
  constexpr std::size_t kBlock = 256;
  const std::size_t n_blocks = (points.size() + kBlock - 1) / kBlock;
  std::vector<detail::Candidate> block_best(n_blocks);
  if (trace) trace->assign(points.size(), ScoredPoint{});
  detail::parallel_for(n_blocks, ctx.threads, [&](std::size_t b) {
    detail::Candidate best;
    const std::size_t end = std::min(points.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      auto c = detail::score(points[i], d_max_ms, ctx);
      if (trace) (*trace)[i] = c;
      if (detail::better(c, best)) best = c;
    }
    block_best[b] = best;
  });
  detail::Candidate best;
  for (const auto& c : block_best)
    if (detail::better(c, best)) best = c;
  return detail::to_result(best, static_cast<std::int64_t>(points.size()), ctx.kind);
}

struct GaConfig {
  int generations{200};
  int population{50};
  double mutation_rate{0.1};
  double crossover_rate{0.9};
  int tournament_size{2};
  int elitism{2};
  // Stop after this many generations without improvement; 0 disables.
  int stall_generations{0};
  // Penalty on infeasible individuals: offset + per_ms * (D - d_max).
  double penalty_offset{1.0};
  double penalty_per_ms{1.0};
};

inline void validate(const GaConfig& ga) {
  if (ga.population < 4) throw std::invalid_argument("GA population must be >= 4");
  if (ga.generations < 1) throw std::invalid_argument("GA needs at least one generation");
  if (ga.tournament_size < 1) throw std::invalid_argument("tournament size must be >= 1");
  if (ga.elitism < 0 || ga.elitism >= ga.population) throw std::invalid_argument("elitism out of range");
  if (!(ga.mutation_rate >= 0 && ga.mutation_rate <= 1) || !(ga.crossover_rate >= 0 && ga.crossover_rate <= 1))
    throw std::invalid_argument("GA rates must lie in [0, 1]");
}

// Genetic search over grid indices. Genes: T_ss index, T_ls index within the
// T_ss-dependent list, T_sc index, T_I index. Tournament selection, uniform
// crossover, +-1 grid step mutation, elitism. Fitness is PS for feasible
// individuals and PS minus the penalty otherwise. Each distinct genome is
// evaluated once, so evaluations <= generations * population.
// When `trace` is given it receives every distinct evaluated point in
// evaluation order.
inline OptResult genetic_search(const SearchSpace& space, double d_max_ms, const GaConfig& ga, const EvalContext& ctx,
                                std::uint64_t seed, std::vector<ScoredPoint>* trace = nullptr) {
  validate(ga);
  std::vector<std::int32_t> ss;
  std::vector<std::vector<std::int32_t>> ls;
  for (auto v : space.t_ss.values()) {
    auto l = space.t_ls_values(v);
    if (l.empty()) continue;
    ss.push_back(v);
    ls.push_back(std::move(l));
  }
  const auto ti = space.t_i_values();
  const auto& sc = space.t_sc_values;
  if (ss.empty() || sc.empty() || ti.empty()) {
    OptResult r;
    r.evaluator_kind = ctx.kind;
    return r;
  }

  using Genome = std::array<int, 4>;
  const std::array<int, 4> fixed_sizes{static_cast<int>(ss.size()), 0, static_cast<int>(sc.size()),
                                       static_cast<int>(ti.size())};
  auto gene_size = [&](const Genome& g, int gene) {
    return gene == 1 ? static_cast<int>(ls[static_cast<std::size_t>(g[0])].size()) : fixed_sizes[gene];
  };
  auto repair = [&](Genome& g) {
    for (int gene : {0, 2, 3, 1}) g[gene] = std::clamp(g[gene], 0, gene_size(g, gene) - 1);
  };
  auto decode = [&](const Genome& g) {
    return space.make(ss[g[0]], ls[g[0]][g[1]], sc[g[2]], ti[g[3]]);
  };

  Rng rng(mix64(seed));
  auto uniform_int = [&](int n) { return static_cast<int>(uniform01(rng) * n); };

  std::map<Genome, detail::Candidate> cache;
  std::int64_t evaluations = 0;
  detail::Candidate best;
  auto fitness = [&](const detail::Candidate& c) {
    return c.feasible ? c.ps : c.ps - ga.penalty_offset - ga.penalty_per_ms * (c.delay - d_max_ms);
  };
  auto evaluate_population = [&](const std::vector<Genome>& pop) {
    std::vector<Genome> fresh;
    for (const auto& g : pop)
      if (!cache.contains(g) && std::find(fresh.begin(), fresh.end(), g) == fresh.end()) fresh.push_back(g);
    std::vector<detail::Candidate> scored(fresh.size());
    detail::parallel_for(fresh.size(), ctx.threads,
                         [&](std::size_t i) { scored[i] = detail::score(decode(fresh[i]), d_max_ms, ctx); });
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      cache.emplace(fresh[i], scored[i]);
      if (trace) trace->push_back(scored[i]);
      if (detail::better(scored[i], best)) best = scored[i];
    }
    evaluations += static_cast<std::int64_t>(fresh.size());
  };

  std::vector<Genome> pop(static_cast<std::size_t>(ga.population));
  for (auto& g : pop) {
    g[0] = uniform_int(fixed_sizes[0]);
    g[1] = uniform_int(gene_size(g, 1));
    g[2] = uniform_int(fixed_sizes[2]);
    g[3] = uniform_int(fixed_sizes[3]);
  }
  evaluate_population(pop);

  int stall = 0;
  for (int gen = 1; gen < ga.generations; ++gen) {
    // Rank by fitness, ties by the search order.
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ca = cache.at(pop[a]);
      const auto& cb = cache.at(pop[b]);
      const double fa = fitness(ca), fb = fitness(cb);
      if (fa != fb) return fa > fb;
      return detail::better(ca, cb);
    });
    auto tournament = [&]() -> const Genome& {
      std::size_t winner = order.size();
      for (int k = 0; k < ga.tournament_size; ++k) {
        const auto rank = static_cast<std::size_t>(uniform_int(static_cast<int>(order.size())));
        winner = std::min(winner, rank);
      }
      return pop[order[winner]];
    };

    std::vector<Genome> next;
    next.reserve(pop.size());
    for (int e = 0; e < ga.elitism; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
    while (next.size() < pop.size()) {
      Genome child = tournament();
      const Genome& other = tournament();
      if (uniform01(rng) < ga.crossover_rate)
        for (int gene = 0; gene < 4; ++gene)
          if (uniform01(rng) < 0.5) child[gene] = other[gene];
      for (int gene : {0, 2, 3, 1})
        if (uniform01(rng) < ga.mutation_rate) child[gene] += uniform01(rng) < 0.5 ? -1 : 1;
      repair(child);
      next.push_back(child);
    }
    const auto before = best;
    pop = std::move(next);
    evaluate_population(pop);

    if (ga.stall_generations > 0) {
      stall = (detail::better(best, before)) ? 0 : stall + 1;
      if (stall >= ga.stall_generations) break;
    }
  }
  return detail::to_result(best, evaluations, ctx.kind);
}

struct ValidationSettings {
  int runs{100};
  std::int64_t horizon_ttis{100'000};
  std::uint64_t seed{0x5eed};
  int max_attempts{50};
};

struct ValidatedResult {
  OptResult result;
  int attempts{0};
  MonteCarloResult evidence;  // Monte Carlo run of the accepted point
};

// Re-checks search candidates by simulation in preference order and accepts
// the first whose mean delay stays within the budget at the upper end of its
// 95% confidence interval. Search-time scores are replaced by the validation
// estimates. If no attempt passes, the attempt with the lowest delay is
// returned marked infeasible.
inline ValidatedResult validate_by_simulation(std::vector<ScoredPoint> points, double d_max_ms,
                                              const EvalContext& ctx, const ValidationSettings& settings,
                                              std::int64_t search_evaluations) {
  std::sort(points.begin(), points.end(), detail::better);
  ValidatedResult out;
  out.result.evaluations = search_evaluations;
  out.result.evaluator_kind = EvaluatorKind::Simulated;
  double best_delay = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (!p.valid || !p.feasible || out.attempts >= settings.max_attempts) break;
    ++out.attempts;
    SimConfig c = ctx.sim;
    c.traffic = ctx.traffic;
    c.time_base = ctx.time_base;
    c.params = p.params;
    c.horizon_ttis = settings.horizon_ttis;
    c.seed = settings.seed;
    auto mc = monte_carlo(c, settings.runs, ctx.threads);
    const double delay = std::isfinite(mc.mean_delay_ms.mean) ? mc.mean_delay_ms.mean : 0.0;
    const bool ok = delay + mc.mean_delay_ms.ci95 <= d_max_ms;
    if (ok || delay < best_delay) {
      best_delay = delay;
      out.result.best = p.params;
      out.result.ps = mc.sleep_fraction.mean;
      out.result.mean_delay_ms = delay;
      out.result.feasible = ok;
      out.evidence = std::move(mc);
    }
    if (ok) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lookup table

struct LutKey {
  std::string model;  // "poisson" or "bursty"
  double lambda_pkt_s{0.0};
  double q{0.0};
  double tti_ms{1.0};
  double d_max_ms{10.0};

  friend bool operator<(const LutKey& a, const LutKey& b) {
    return std::tie(a.model, a.lambda_pkt_s, a.q, a.tti_ms, a.d_max_ms) <
           std::tie(b.model, b.lambda_pkt_s, b.q, b.tti_ms, b.d_max_ms);
  }
  friend bool operator==(const LutKey&, const LutKey&) = default;
};

struct LutIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string exact_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw LutIoError("lookup table: bad number '" + std::string(s) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw LutIoError("lookup table: bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

// Offline-trained table of optimized configurations, persisted as one
// comma-separated record per line in the column order of kHeader. Reals are
// written in shortest round-trip form, so a reload is bit-exact. Every put
// rewrites the file through a temporary and a rename.
class LookupTable {
 public:
  static constexpr std::string_view kHeader =
      "model,lambda_pkt_s,q,tti_ms,d_max_ms,t_on,t_i,t_ss,t_ls,t_sc,ps,mean_delay_ms,feasible,evaluations,"
      "evaluator";

  explicit LookupTable(std::filesystem::path path) : path_(std::move(path)) { load(); }

  std::optional<OptResult> get(const LutKey& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const LutKey& key, const OptResult& value) {
    for (double v : {key.lambda_pkt_s, key.q, key.tti_ms, key.d_max_ms})
      if (!std::isfinite(v)) throw std::invalid_argument("lookup table key fields must be finite");
    entries_[key] = value;
    save();
  }

  std::size_t size() const { return entries_.size(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  void load() {
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) return;
    std::ifstream in(path_);
    if (!in) throw LutIoError("cannot read lookup table " + path_.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == kHeader) continue;
      std::vector<std::string_view> f;
      std::string_view rest(line);
      for (;;) {
        const auto comma = rest.find(',');
        f.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (f.size() != 15) throw LutIoError("lookup table: expected 15 fields in '" + line + "'");
      LutKey key{std::string(f[0]), detail::parse_double(f[1]), detail::parse_double(f[2]),
                 detail::parse_double(f[3]), detail::parse_double(f[4])};
      OptResult r;
      r.best.t_on = static_cast<std::int32_t>(detail::parse_int(f[5]));
      r.best.t_i = static_cast<std::int32_t>(detail::parse_int(f[6]));
      r.best.t_ss = static_cast<std::int32_t>(detail::parse_int(f[7]));
      r.best.t_ls = static_cast<std::int32_t>(detail::parse_int(f[8]));
      r.best.t_sc = static_cast<std::int32_t>(detail::parse_int(f[9]));
      r.ps = detail::parse_double(f[10]);
      r.mean_delay_ms = detail::parse_double(f[11]);
      r.feasible = detail::parse_int(f[12]) != 0;
      r.evaluations = detail::parse_int(f[13]);
      if (f[14] == "analytic")
        r.evaluator_kind = EvaluatorKind::Analytic;
      else if (f[14] == "simulated")
        r.evaluator_kind = EvaluatorKind::Simulated;
      else
        throw LutIoError("lookup table: unknown evaluator '" + std::string(f[14]) + "'");
      entries_[key] = r;
    }
  }

  void save() const {
    std::ostringstream out;
    out << kHeader << '\n';
    for (const auto& [k, r] : entries_) {
      using detail::exact_double;
      out << k.model << ',' << exact_double(k.lambda_pkt_s) << ',' << exact_double(k.q) << ','
          << exact_double(k.tti_ms) << ',' << exact_double(k.d_max_ms) << ',' << r.best.t_on << ',' << r.best.t_i
          << ',' << r.best.t_ss << ',' << r.best.t_ls << ',' << r.best.t_sc << ',' << exact_double(r.ps) << ','
          << exact_double(r.mean_delay_ms) << ',' << (r.feasible ? 1 : 0) << ',' << r.evaluations << ','
          << evaluator_name(r.evaluator_kind) << '\n';
    }
    auto tmp = path_;
    tmp += ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw LutIoError("cannot write " + tmp.string());
      f << out.str();
      f.flush();
      if (!f) throw LutIoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    if (ec) throw LutIoError("cannot replace " + path_.string() + ": " + ec.message());
  }

  std::filesystem::path path_;
  std::map<LutKey, OptResult> entries_;
};

}  // namespace drx
