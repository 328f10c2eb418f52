#pragma once

// Downlink traffic models: Poisson and two-state bursty arrivals, their
// closed-form statistics, and per-TTI arrival sampling.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace drx {

// Error raised when a target rate cannot be realized by a traffic model.
struct InfeasibleRate : std::domain_error {
  using std::domain_error::domain_error;
};

struct PoissonTraffic {
  double lambda_per_tti{0.0};
};

// Two-state bursty source: activation probability p, burstiness q.
struct BurstyTraffic {
  double p{1.0};
  double q{0.0};
};

using TrafficSpec = std::variant<PoissonTraffic, BurstyTraffic>;

struct TimeBase {
  double tti_ms{1.0};
};

struct ArrivalTrace {
  std::vector<std::uint32_t> counts;
  std::int64_t horizon() const { return static_cast<std::int64_t>(counts.size()); }
};

inline bool is_bursty(const TrafficSpec& spec) {
  return std::holds_alternative<BurstyTraffic>(spec);
}

inline void validate(const TrafficSpec& spec) {
  if (const auto* poisson = std::get_if<PoissonTraffic>(&spec)) {
    if (!(poisson->lambda_per_tti >= 0.0) || !std::isfinite(poisson->lambda_per_tti))
      throw std::invalid_argument("poisson rate must be finite and non-negative");
    return;
  }
  const auto& b = std::get<BurstyTraffic>(spec);
  if (!(b.p > 0.0 && b.p <= 1.0))
    throw std::invalid_argument("bursty activation probability must lie in (0, 1]");
  if (!(b.q >= 0.0 && b.q < 1.0))
    throw std::invalid_argument("bursty burstiness must lie in [0, 1)");
}

inline void validate(const TimeBase& tb) {
  if (!(tb.tti_ms > 0.0) || !std::isfinite(tb.tti_ms))
    throw std::invalid_argument("tti_ms must be positive");
}

// Mean packets per TTI. For the bursty model this is p(1+q).
inline double mean_rate(const TrafficSpec& spec) {
  if (const auto* poisson = std::get_if<PoissonTraffic>(&spec)) return poisson->lambda_per_tti;
  const auto& b = std::get<BurstyTraffic>(spec);
  return b.p * (1.0 + b.q);
}

inline double per_tti_rate(double rate_pkt_per_s, TimeBase time_base) {
  if (!(rate_pkt_per_s >= 0.0)) throw std::invalid_argument("rate must be non-negative");
  validate(time_base);
  return rate_pkt_per_s * time_base.tti_ms / 1000.0;
}

// Probability of no arrival within t TTIs. The bursty expression
// p(1-p)^(t-1) is a first-arrival mass, not a survival probability; the
// simulator does not rely on it.
inline double no_arrival_prob(const TrafficSpec& spec, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("no_arrival_prob: t must be >= 1");
  if (const auto* poisson = std::get_if<PoissonTraffic>(&spec))
    return std::exp(-poisson->lambda_per_tti * static_cast<double>(t));
  const auto& b = std::get<BurstyTraffic>(spec);
  return b.p * std::pow(1.0 - b.p, static_cast<double>(t - 1));
}

// P(k extra packets in a burst) = (1-q) q^k.
inline double burst_length_pmf(double q, std::int64_t k) {
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("burst_length_pmf: q must lie in [0, 1)");
  if (k < 0) throw std::invalid_argument("burst_length_pmf: k must be >= 0");
  if (k == 0) return 1.0 - q;
  return (1.0 - q) * std::pow(q, static_cast<double>(k));
}

// Activation probability giving a bursty source the same mean rate as a
// Poisson source of rate lambda: p = lambda / (1 + q).
inline double activation_from_rate(double lambda_per_tti, double q) {
  if (!(lambda_per_tti >= 0.0)) throw std::invalid_argument("activation_from_rate: negative rate");
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("activation_from_rate: q must lie in [0, 1)");
  const double p = lambda_per_tti / (1.0 + q);
  if (p > 1.0) throw InfeasibleRate("activation_from_rate: rate too high for burstiness " + std::to_string(q));
  return p;
}

// ---------------------------------------------------------------------------
// Random streams

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-run seed: mix64(base_seed ^ mix64(run_index)).
inline std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run_index) {
  return mix64(base_seed ^ mix64(run_index));
}

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Stateful per-TTI arrival generator.
//
// Poisson counts are drawn by inversion. The bursty source is the two-state
// chain: an idle TTI activates with hazard `activation_hazard`, an active TTI
// emits one packet and stays active for the next TTI with probability q, so
// each burst carries 1 + k packets with k ~ (1-q) q^k. The hazard is chosen so
// that the long-run rate equals mean_rate(spec) = p(1+q); at q = 0 it is p.
class ArrivalSampler {
 public:
  explicit ArrivalSampler(const TrafficSpec& spec) : spec_(spec) {
    validate(spec_);
    if (const auto* poisson = std::get_if<PoissonTraffic>(&spec_)) {
      poisson_lambda_ = poisson->lambda_per_tti;
      poisson_p0_ = std::exp(-poisson_lambda_);
    } else {
      const auto& b = std::get<BurstyTraffic>(spec_);
      q_ = b.q;
      activation_hazard_ = activation_hazard(b);
    }
  }

  // Per-idle-TTI activation probability realizing rate r = p(1+q):
  // r = a / ((1-q) + a q)  =>  a = r (1-q) / (1 - r q).
  static double activation_hazard(const BurstyTraffic& b) {
    const double r = b.p * (1.0 + b.q);
    if (r > 1.0) throw InfeasibleRate("bursty mean rate exceeds one packet per TTI");
    return r * (1.0 - b.q) / (1.0 - r * b.q);
  }

  std::uint32_t next(Rng& rng) {
    if (std::holds_alternative<PoissonTraffic>(spec_)) {
      if (poisson_lambda_ == 0.0) return 0;
      double u = uniform01(rng);
      double pk = poisson_p0_;
      double cdf = pk;
      std::uint32_t k = 0;
      while (u > cdf && pk > 0.0) {
        ++k;
        pk *= poisson_lambda_ / static_cast<double>(k);
        cdf += pk;
      }
      return k;
    }
    if (!active_) {
      if (uniform01(rng) >= activation_hazard_) return 0;
      active_ = true;
    }
    // Active TTI: one packet, then decide whether the burst continues.
    active_ = uniform01(rng) < q_;
    return 1;
  }

  bool in_burst() const { return active_; }

 private:
  TrafficSpec spec_;
  double poisson_lambda_{0.0};
  double poisson_p0_{1.0};
  double q_{0.0};
  double activation_hazard_{0.0};
  bool active_{false};
};

inline ArrivalTrace sample_arrivals(const TrafficSpec& spec, std::int64_t horizon, Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("sample_arrivals: horizon must be >= 1");
  ArrivalSampler sampler(spec);
  ArrivalTrace trace;
  trace.counts.resize(static_cast<std::size_t>(horizon));
  for (auto& c : trace.counts) c = sampler.next(rng);
  return trace;
}

}  // namespace drx
