#pragma once

// Semi-Markov model of the DRX cycle.
//
// States: S_0 continuous reception; S_{2i-1}/S_{2i} on/sleep of the i-th
// short cycle (i = 1..t_sc); S_{2t_sc+1}/S_{2t_sc+2} on/sleep of the long
// cycle. Forward transitions happen when no packet arrives during the state;
// the remaining probability mass of every row goes to S_0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "drx_machine.hpp"
#include "traffic.hpp"

namespace drx {

struct ChainModel {
  int t_sc{1};
  Eigen::MatrixXd P;   // row-stochastic transition matrix
  Eigen::VectorXd U;   // holding times, TTIs
  Eigen::VectorXd pi;  // steady state, empty until solved

  int n_states() const { return static_cast<int>(P.rows()); }
  int long_on() const { return 2 * t_sc + 1; }
  int long_sleep() const { return 2 * t_sc + 2; }
};

struct AnalyticReport {
  double ps{0.0};
  double mean_delay_ttis{0.0};
  double mean_delay_ms{0.0};
};

// (1 - P_0(T)) / lambda, continued to its limit T at lambda = 0.
inline double truncated_holding_time(const TrafficSpec& traffic, std::int64_t T) {
  const double lambda = mean_rate(traffic);
  if (const auto* poisson = std::get_if<PoissonTraffic>(&traffic)) {
    if (poisson->lambda_per_tti == 0.0) return static_cast<double>(T);
    return -std::expm1(-lambda * static_cast<double>(T)) / lambda;
  }
  return (1.0 - no_arrival_prob(traffic, T)) / lambda;
}

inline ChainModel build_chain(const DrxParams& params, const TrafficSpec& traffic) {
  validate(params);
  validate(traffic);
  const int n = 2 * params.t_sc + 3;
  ChainModel chain;
  chain.t_sc = params.t_sc;
  chain.P = Eigen::MatrixXd::Zero(n, n);
  chain.U = Eigen::VectorXd::Zero(n);

  auto forward = [&](int from, int to, double prob) {
    chain.P(from, to) = prob;
    chain.P(from, 0) += 1.0 - prob;
  };

  const double p_it = no_arrival_prob(traffic, params.t_i);
  const double p_on = no_arrival_prob(traffic, params.t_on);
  const double p_ss = no_arrival_prob(traffic, params.t_ss);
  const double p_ls = no_arrival_prob(traffic, params.t_ls);

  forward(0, 1, p_it);
  for (int i = 1; i <= params.t_sc + 1; ++i) forward(2 * i - 1, 2 * i, p_on);
  for (int i = 1; i <= params.t_sc; ++i) forward(2 * i, 2 * i + 1, p_ss);
  forward(chain.long_sleep(), chain.long_on(), p_ls);

  chain.U(0) = truncated_holding_time(traffic, params.t_i);
  const double u_on = truncated_holding_time(traffic, params.t_on);
  for (int i = 1; i <= params.t_sc + 1; ++i) chain.U(2 * i - 1) = u_on;
  for (int i = 1; i <= params.t_sc; ++i) chain.U(2 * i) = params.t_ss;
  chain.U(chain.long_sleep()) = params.t_ls;
  return chain;
}

inline double stationarity_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  return (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

// Solves pi P = pi, sum(pi) = 1 by replacing one balance equation with the
// normalization row. The chain has a single closed class for any valid
// input (the long-cycle pair at zero traffic), so the system is regular.
inline Eigen::VectorXd steady_state(const Eigen::MatrixXd& P) {
  const auto n = P.rows();
  if (n == 0 || P.cols() != n) throw std::invalid_argument("steady_state: square matrix required");
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw std::domain_error("steady_state: chain has no unique stationary distribution");
  Eigen::VectorXd pi = lu.solve(b);
  // One step of iterative refinement.
  pi += lu.solve(b - A * pi);
  for (auto& v : pi) v = std::max(v, 0.0);
  pi /= pi.sum();
  return pi;
}

inline Eigen::VectorXd steady_state(const ChainModel& chain) { return steady_state(chain.P); }

// Product-form recursion: pi_k = pi_0 prod_{j<=k} p_{j-1,j} along the short
// cycles, the long-cycle pair closed through 1 - p_on,sleep p_sleep,on, and
// pi_0 from normalization.
inline Eigen::VectorXd closed_form_steady_state(const ChainModel& chain) {
  const int n = chain.n_states();
  const int lon = chain.long_on();
  const int lsl = chain.long_sleep();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);  // weights relative to pi_0
  w(0) = 1.0;
  for (int k = 1; k <= 2 * chain.t_sc; ++k) w(k) = w(k - 1) * chain.P(k - 1, k);

  const double loop = chain.P(lon, lsl) * chain.P(lsl, lon);
  const double denom = 1.0 - loop;
  const double inflow = w(2 * chain.t_sc) * chain.P(2 * chain.t_sc, lon);
  Eigen::VectorXd pi(n);
  if (denom <= 1e-300) {
    // Closed long cycle: all mass ends up on the on/sleep pair.
    pi.setZero();
    pi(lon) = 1.0;
    pi(lsl) = chain.P(lon, lsl);
  } else {
    w(lon) = inflow / denom;
    w(lsl) = inflow * chain.P(lon, lsl) / denom;
    pi = w;
  }
  return pi / pi.sum();
}

inline double occupancy_total(const ChainModel& chain) {
  if (chain.pi.size() != chain.n_states()) throw std::logic_error("steady state not computed");
  return chain.pi.dot(chain.U);
}

inline double power_saving(const ChainModel& chain) {
  const double total = occupancy_total(chain);
  if (!(total > 0.0)) throw std::logic_error("power_saving: zero occupancy");
  double sleep = 0.0;
  for (int i = 1; i <= chain.t_sc + 1; ++i) sleep += chain.pi(2 * i) * chain.U(2 * i);
  return sleep / total;
}

namespace detail {

// Nested-sum term for bursts with k extra packets in a sleep window of T
// TTIs: sum over d_1 in [k, T] of sum over chains d_1 > d_2 > ... > d_k with
// d_j >= k - j + 1 of (sum d_i) / prod_{i<k} (d_i - (k - i)).
//
// Evaluated bottom-up: for each level j and value v we keep the total chain
// weight W_j(v) and weighted delay sum S_j(v) over the tail d_j..d_k, then
// take prefix sums to feed level j - 1.
inline double burst_delay_term(int k, int T) {
  if (k > T) return 0.0;
  std::vector<double> W(T + 1, 0.0), S(T + 1, 0.0);
  for (int v = 1; v <= T; ++v) {
    W[v] = 1.0;
    S[v] = v;
  }
  for (int j = k - 1; j >= 1; --j) {
    const int lower_next = k - j;  // smallest allowed d_{j+1}
    std::vector<double> nW(T + 1, 0.0), nS(T + 1, 0.0);
    double accW = 0.0, accS = 0.0;
    int u = lower_next;
    for (int v = k - j + 1; v <= T; ++v) {
      while (u <= v - 1) {
        accW += W[u];
        accS += S[u];
        ++u;
      }
      const double factor = 1.0 / static_cast<double>(v - (k - j));
      nW[v] = factor * accW;
      nS[v] = factor * (accS + static_cast<double>(v) * accW);
    }
    W.swap(nW);
    S.swap(nS);
  }
  double total = 0.0;
  for (int d1 = k; d1 <= T; ++d1) total += S[d1];
  return total;
}

}  // namespace detail

inline constexpr double kBurstWeightCutoff = 1e-12;

// Mean sleep-induced delay in TTIs for a sleep window of T TTIs.
inline double cycle_delay(const TrafficSpec& traffic, std::int64_t T) {
  if (T < 1) throw std::invalid_argument("cycle_delay: T must be >= 1");
  if (!is_bursty(traffic)) return static_cast<double>(T) / 2.0;
  const double q = std::get<BurstyTraffic>(traffic).q;
  thread_local std::map<std::pair<double, std::int64_t>, double> memo;
  if (const auto it = memo.find({q, T}); it != memo.end()) return it->second;
  double d = 0.0;
  for (int k = 1; k <= T; ++k) {
    const double weight = burst_length_pmf(q, k);
    if (weight < kBurstWeightCutoff) break;
    d += weight / static_cast<double>(T - (k - 1)) * detail::burst_delay_term(k, static_cast<int>(T));
  }
  memo.emplace(std::pair{q, T}, d);
  return d;
}

// Single-burst (k = 1) contribution of cycle_delay.
inline double cycle_delay_single_burst(double q, std::int64_t T) {
  return burst_length_pmf(q, 1) / static_cast<double>(T) * detail::burst_delay_term(1, static_cast<int>(T));
}

inline double mean_delay(const ChainModel& chain, const DrxParams& params, const TrafficSpec& traffic) {
  const double total = occupancy_total(chain);
  if (!(total > 0.0)) throw std::logic_error("mean_delay: zero occupancy");
  double short_sleep = 0.0;
  for (int i = 1; i <= chain.t_sc; ++i) short_sleep += chain.pi(2 * i) * chain.U(2 * i);
  const double long_sleep = chain.pi(chain.long_sleep()) * chain.U(chain.long_sleep());
  double numer = 0.0;
  if (short_sleep > 0.0) numer += cycle_delay(traffic, params.t_ss) * short_sleep;
  if (long_sleep > 0.0) numer += cycle_delay(traffic, params.t_ls) * long_sleep;
  return numer / total;
}

// Markov-inequality bound on P(delay > threshold).
inline double markov_delay_bound(double mean_delay_ms, double threshold_ms) {
  if (!(mean_delay_ms > 0.0) || !(threshold_ms > 0.0))
    throw std::invalid_argument("markov_delay_bound: inputs must be positive");
  return std::min(1.0, mean_delay_ms / threshold_ms);
}

inline AnalyticReport analyze(const DrxParams& params, const TrafficSpec& traffic, TimeBase time_base) {
  validate(time_base);
  ChainModel chain = build_chain(params, traffic);
  chain.pi = steady_state(chain);
  AnalyticReport r;
  r.ps = power_saving(chain);
  r.mean_delay_ttis = mean_delay(chain, params, traffic);
  r.mean_delay_ms = r.mean_delay_ttis * time_base.tti_ms;
  return r;
}

}  // namespace drx
