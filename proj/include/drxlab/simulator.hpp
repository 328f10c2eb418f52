#pragma once

// TTI-slotted co-simulation of a base-station buffer and one DRX device.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "drx_machine.hpp"
#include "traffic.hpp"

namespace drx {

enum class ItPolicy { Standard, Intelligent, Genie };

inline constexpr std::string_view policy_name(ItPolicy p) {
  switch (p) {
    case ItPolicy::Standard: return "standard";
    case ItPolicy::Intelligent: return "intelligent";
    case ItPolicy::Genie: return "genie";
  }
  return "?";
}

struct PowerWeights {
  double active{1.0};
  double on{1.0};
  double sleep{0.0};
};

struct SimConfig {
  TrafficSpec traffic{PoissonTraffic{0.02}};
  DrxParams params{};
  TimeBase time_base{};
  ItPolicy it_policy{ItPolicy::Standard};
  double service_multiplier{4.0};
  std::int64_t horizon_ttis{100'000};
  std::uint64_t seed{1};
  PowerWeights power_weights{};
  // Token-bucket depth in packets; the bucket never holds less than one
  // TTI's worth of service. Infinite depth lets tokens accrued while asleep
  // drain the backlog in the first listening TTI.
  double bucket_depth_pkts{std::numeric_limits<double>::infinity()};
  // Negative selects the default of 10 long cycles.
  std::int64_t warmup_ttis{-1};

  std::int64_t warmup() const {
    return warmup_ttis >= 0 ? warmup_ttis : 10 * static_cast<std::int64_t>(params.t_on + params.t_ls);
  }
  double service_rate() const { return service_multiplier * mean_rate(traffic); }
};

inline void validate(const SimConfig& c) {
  validate(c.traffic);
  validate(c.params);
  validate(c.time_base);
  if (c.horizon_ttis < 10'000) throw std::invalid_argument("horizon must be at least 10^4 TTIs");
  if (c.horizon_ttis > (std::int64_t{1} << 40)) throw std::invalid_argument("horizon too large");
  if (!(c.service_multiplier > 1.0)) throw std::invalid_argument("service multiplier must exceed 1");
  if (c.power_weights.active < 0 || c.power_weights.on < 0 || c.power_weights.sleep < 0)
    throw std::invalid_argument("power weights must be non-negative");
  if (!(c.bucket_depth_pkts > 0.0)) throw std::invalid_argument("bucket depth must be positive");
  if (c.warmup() >= c.horizon_ttis) throw std::invalid_argument("warm-up must be shorter than the horizon");
}

struct SimMetrics {
  double sleep_fraction{0.0};
  double power{0.0};
  double mean_delay_ms{std::numeric_limits<double>::quiet_NaN()};
  // Mean number of sleeping TTIs a delivered packet waited through, in ms.
  double mean_sleep_delay_ms{std::numeric_limits<double>::quiet_NaN()};
  std::vector<double> delay_samples_ms;
  std::array<double, kModeCount> occupancy{};
  std::int64_t packets_arrived{0};
  std::int64_t packets_delivered{0};
  std::int64_t packets_undelivered{0};
  std::int64_t it_resets{0};
  std::int64_t it_resets_suppressed{0};

  double occupancy_of(Mode m) const { return occupancy[static_cast<std::size_t>(m)]; }
};

// Decides whether the IT is restarted on a data exchange. Under the
// intelligent policy the timer is kept running when the time it has left
// strictly exceeds the time needed to drain the pending buffer.
inline bool it_restart_decision(ItPolicy policy, std::int64_t it_remaining_ttis, std::int64_t buffer_len,
                                double service_rate_pkt_per_tti) {
  if (!(service_rate_pkt_per_tti > 0.0)) throw std::invalid_argument("service rate must be positive");
  switch (policy) {
    case ItPolicy::Standard: return true;
    case ItPolicy::Genie: return false;
    case ItPolicy::Intelligent: {
      if (buffer_len <= 0) return false;
      const double drain = std::ceil(static_cast<double>(buffer_len) / service_rate_pkt_per_tti);
      return drain >= static_cast<double>(it_remaining_ttis);
    }
  }
  return true;
}

namespace detail {

struct QueuedPacket {
  std::int64_t arrival_tti;
  std::int64_t sleep_mark;  // device sleep TTIs elapsed at arrival
};

}  // namespace detail

// One run. Per TTI: enqueue arrivals, accrue service tokens, deliver while
// the device listens, then advance the DRX machine with the resulting grant
// and IT-reset indication. Under the genie policy the device listens exactly
// in TTIs where the buffer is non-empty; its idle TTIs are booked as
// long-cycle sleep.
inline SimMetrics run_once(const SimConfig& config) {
  validate(config);
  const auto& params = config.params;
  const double rate = config.service_rate();
  const double cap = std::max(config.bucket_depth_pkts, rate);
  const std::int64_t warmup = config.warmup();
  const bool genie = config.it_policy == ItPolicy::Genie;
  const double tti_ms = config.time_base.tti_ms;

  Rng rng(config.seed);
  ArrivalSampler sampler(config.traffic);
  DeviceState state = init(params);
  std::deque<detail::QueuedPacket> buffer;
  double tokens = std::isinf(cap) ? rate : cap;
  std::int64_t sleep_ttis = 0;
  std::array<std::int64_t, kModeCount> counts{};

  SimMetrics m;
  double delay_sum = 0.0, sleep_delay_sum = 0.0;
  std::int64_t sampled = 0;

  for (std::int64_t t = 0; t < config.horizon_ttis; ++t) {
    const std::uint32_t arrivals = sampler.next(rng);
    for (std::uint32_t a = 0; a < arrivals; ++a) buffer.push_back({t, sleep_ttis});
    m.packets_arrived += arrivals;
    tokens = std::min(tokens + rate, cap);

    const bool listening = genie ? !buffer.empty() : state.listening();
    std::int64_t delivered = 0;
    if (listening && !buffer.empty() && tokens >= 1.0) {
      const auto budget = static_cast<std::int64_t>(std::floor(tokens));
      delivered = std::min<std::int64_t>(budget, static_cast<std::int64_t>(buffer.size()));
      for (std::int64_t k = 0; k < delivered; ++k) {
        const auto& pkt = buffer.front();
        if (pkt.arrival_tti >= warmup) {
          const double d = static_cast<double>(t - pkt.arrival_tti + 1) * tti_ms;
          m.delay_samples_ms.push_back(d);
          delay_sum += d;
          sleep_delay_sum += static_cast<double>(sleep_ttis - pkt.sleep_mark) * tti_ms;
          ++sampled;
        }
        buffer.pop_front();
      }
      tokens -= static_cast<double>(delivered);
      m.packets_delivered += delivered;
    }

    const Mode booked = genie ? (listening ? Mode::ActiveRx : Mode::LongSleep) : state.mode;
    if (!listening) ++sleep_ttis;
    if (t >= warmup) ++counts[static_cast<std::size_t>(booked)];

    if (!genie) {
      TickInput in;
      in.pdcch_grant = delivered > 0;
      if (in.pdcch_grant) {
        if (state.mode == Mode::ActiveRx) {
          in.it_reset_indicated = it_restart_decision(config.it_policy, state.it_remaining - 1,
                                                      static_cast<std::int64_t>(buffer.size()), rate);
          ++(in.it_reset_indicated ? m.it_resets : m.it_resets_suppressed);
        } else {
          in.it_reset_indicated = true;
        }
      }
      state = tick(state, in, params).next;
    }
  }

  const auto measured = static_cast<double>(config.horizon_ttis - warmup);
  for (int i = 0; i < kModeCount; ++i) m.occupancy[i] = static_cast<double>(counts[i]) / measured;
  const auto active = counts[static_cast<int>(Mode::ActiveRx)];
  const auto on = counts[static_cast<int>(Mode::ShortOn)] + counts[static_cast<int>(Mode::LongOn)];
  const auto asleep = counts[static_cast<int>(Mode::ShortSleep)] + counts[static_cast<int>(Mode::LongSleep)];
  m.sleep_fraction = static_cast<double>(asleep) / measured;
  const auto& w = config.power_weights;
  m.power = (w.active * static_cast<double>(active) + w.on * static_cast<double>(on) +
             w.sleep * static_cast<double>(asleep)) /
            measured;
  if (sampled > 0) {
    m.mean_delay_ms = delay_sum / static_cast<double>(sampled);
    m.mean_sleep_delay_ms = sleep_delay_sum / static_cast<double>(sampled);
  }
  m.packets_undelivered = static_cast<std::int64_t>(buffer.size());
  return m;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct MetricSummary {
  double mean{0.0};
  double std_error{0.0};
  double ci95{0.0};  // half-width, normal approximation
  std::int64_t n{0};
};

// Summary over the finite entries of `values`, summed in index order.
inline MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  double sum = 0.0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++s.n;
    }
  if (s.n == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values)
    if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.std_error = sd / std::sqrt(static_cast<double>(s.n));
  s.ci95 = 1.96 * s.std_error;
  return s;
}

struct MonteCarloResult {
  MetricSummary power;
  MetricSummary sleep_fraction;
  MetricSummary mean_delay_ms;
  MetricSummary mean_sleep_delay_ms;
  std::vector<SimMetrics> runs;          // per-run metrics, delay samples moved out
  std::vector<double> pooled_delays_ms;  // concatenated in run order
  std::int64_t packets_undelivered{0};
};

inline unsigned default_thread_count() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

// Independent runs seeded with run_seed(config.seed, i). Runs may execute on
// several threads; results are stored by index and reduced in index order so
// the aggregate does not depend on scheduling.
inline MonteCarloResult monte_carlo(const SimConfig& config, int n_runs, unsigned threads = 0) {
  if (n_runs < 2) throw std::invalid_argument("monte_carlo: need at least 2 runs");
  validate(config);
  std::vector<SimMetrics> runs(static_cast<std::size_t>(n_runs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n_runs; i = next++) {
      SimConfig c = config;
      c.seed = run_seed(config.seed, static_cast<std::uint64_t>(i));
      runs[static_cast<std::size_t>(i)] = run_once(c);
    }
  };
  const unsigned n_threads = std::min<unsigned>(threads == 0 ? default_thread_count() : threads,
                                                static_cast<unsigned>(n_runs));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }

  MonteCarloResult r;
  std::vector<double> power, sleep, delay, sleep_delay;
  std::size_t pooled = 0;
  for (const auto& run : runs) pooled += run.delay_samples_ms.size();
  r.pooled_delays_ms.reserve(pooled);
  for (auto& run : runs) {
    power.push_back(run.power);
    sleep.push_back(run.sleep_fraction);
    delay.push_back(run.mean_delay_ms);
    sleep_delay.push_back(run.mean_sleep_delay_ms);
    r.packets_undelivered += run.packets_undelivered;
    r.pooled_delays_ms.insert(r.pooled_delays_ms.end(), run.delay_samples_ms.begin(), run.delay_samples_ms.end());
    run.delay_samples_ms = {};
  }
  r.power = summarize(power);
  r.sleep_fraction = summarize(sleep);
  r.mean_delay_ms = summarize(delay);
  r.mean_sleep_delay_ms = summarize(sleep_delay);
  r.runs = std::move(runs);
  return r;
}

// ---------------------------------------------------------------------------
// Delay distribution

struct CdfPoint {
  double value;
  double probability;
};

// Right-continuous step CDF evaluated at each distinct sample value.
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_cdf: no samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.push_back({samples[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

// F(x) on sorted samples.
inline double cdf_at(const std::vector<double>& sorted, double x) {
  if (sorted.empty()) throw std::invalid_argument("cdf_at: no samples");
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

// Smallest sample value v with F(v) >= p, on sorted samples.
inline double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: no samples");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in (0, 1]");
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

}  // namespace drx
