#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "drxlab/analytic_model.hpp"

namespace {

using namespace drx;

DrxParams params(int t_ss, int t_ls, int t_sc, int t_i = 50, int t_on = 8) {
  DrxParams p;
  p.t_on = t_on;
  p.t_i = t_i;
  p.t_ss = t_ss;
  p.t_ls = t_ls;
  p.t_sc = t_sc;
  return p;
}

// Stationary vector by plain power iteration on the jump chain (lazy
// version, so periodic chains converge too).
std::vector<double> power_iteration(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  std::vector<double> pi(n, 1.0 / n), nx(n);
  for (int it = 0; it < 200000; ++it) {
    std::fill(nx.begin(), nx.end(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) nx[j] += 0.5 * pi[i] * P(i, j);
    for (int i = 0; i < n; ++i) nx[i] += 0.5 * pi[i];
    double diff = 0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(nx[i] - pi[i]));
    pi.swap(nx);
    if (diff < 1e-15) break;
  }
  return pi;
}

TEST(BuildChain, LayoutAndRowSums) {
  const auto p = params(32, 128, 3);
  const auto chain = build_chain(p, PoissonTraffic{0.02});
  ASSERT_EQ(chain.n_states(), 2 * 3 + 3);
  for (int i = 0; i < chain.n_states(); ++i) EXPECT_NEAR(chain.P.row(i).sum(), 1.0, 1e-15);
  EXPECT_NEAR(chain.P(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(chain.P(1, 2), std::exp(-0.16), 1e-15);
  EXPECT_NEAR(chain.P(2, 3), std::exp(-0.64), 1e-15);
  EXPECT_NEAR(chain.P(6, 7), std::exp(-0.64), 1e-15);  // last short sleep into long on
  EXPECT_NEAR(chain.P(8, 7), std::exp(-2.56), 1e-15);  // long sleep back to long on
  EXPECT_DOUBLE_EQ(chain.U(2), 32.0);
  EXPECT_DOUBLE_EQ(chain.U(8), 128.0);
  EXPECT_NEAR(chain.U(0), (1 - std::exp(-1.0)) / 0.02, 1e-12);
  EXPECT_NEAR(chain.U(7), (1 - std::exp(-0.16)) / 0.02, 1e-12);
}

TEST(BuildChain, ZeroRateHoldingTimesTakeTheirLimit) {
  const auto chain = build_chain(params(32, 640, 1), PoissonTraffic{0.0});
  EXPECT_DOUBLE_EQ(chain.U(0), 50.0);
  EXPECT_DOUBLE_EQ(chain.U(1), 8.0);
}

TEST(SteadyState, MatchesPowerIteration) {
  for (const TrafficSpec t : {TrafficSpec{PoissonTraffic{0.02}}, TrafficSpec{PoissonTraffic{0.005}},
                              TrafficSpec{BurstyTraffic{0.02 / 1.5, 0.5}}}) {
    auto chain = build_chain(params(48, 144, 4), t);
    const auto pi = steady_state(chain);
    const auto ref = power_iteration(chain.P);
    for (int i = 0; i < chain.n_states(); ++i) EXPECT_NEAR(pi(i), ref[i], 1e-10) << i;
    EXPECT_LT(stationarity_residual(chain.P, pi), 1e-14);
  }
}

TEST(SteadyState, MatchesChainWalkFrequencies) {
  auto chain = build_chain(params(32, 96, 2), PoissonTraffic{0.02});
  const auto pi = steady_state(chain);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> visits(chain.n_states(), 0.0);
  int s = 0;
  const int steps = 10'000'000;
  for (int k = 0; k < steps; ++k) {
    visits[s] += 1;
    double x = u(rng), acc = 0.0;
    int next = chain.n_states() - 1;
    for (int j = 0; j < chain.n_states(); ++j) {
      acc += chain.P(s, j);
      if (x < acc) {
        next = j;
        break;
      }
    }
    s = next;
  }
  for (int i = 0; i < chain.n_states(); ++i) EXPECT_NEAR(visits[i] / steps, pi(i), 1e-2) << i;
}

TEST(SteadyState, ClosedFormAgreesWithSolver) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> ss(32, 160), sc(1, 16);
  std::uniform_real_distribution<double> lam(0.0005, 0.2);
  for (int trial = 0; trial < 100; ++trial) {
    const int t_ss = ss(rng);
    const auto p = params(t_ss, t_ss + 1 + static_cast<int>(rng() % 400), sc(rng));
    const TrafficSpec t = trial % 2 ? TrafficSpec{PoissonTraffic{lam(rng)}}
                                    : TrafficSpec{BurstyTraffic{lam(rng) / 1.5, 0.5}};
    const auto chain = build_chain(p, t);
    const auto a = steady_state(chain);
    const auto b = closed_form_steady_state(chain);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
  }
}

TEST(SteadyState, RejectsNonSquare) {
  EXPECT_THROW(steady_state(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(PowerSaving, ZeroTrafficLimit) {
  const auto p = params(32, 640, 4);
  const auto r = analyze(p, PoissonTraffic{0.0}, TimeBase{1.0});
  // All mass on the long cycle: sleep share 640 / 648, mean wait half a
  // long sleep weighted by that share.
  EXPECT_NEAR(r.ps, 640.0 / 648.0, 1e-12);
  EXPECT_NEAR(r.ps, 0.98765432098765, 1e-12);
  EXPECT_NEAR(r.mean_delay_ttis, 320.0 * 640.0 / 648.0, 1e-9);
  EXPECT_NEAR(r.mean_delay_ttis, 316.04938271604, 1e-9);
}

TEST(PowerSaving, MatchesTimeWeightedOracle) {
  const auto p = params(48, 144, 4);
  const TrafficSpec t = PoissonTraffic{0.02};
  auto chain = build_chain(p, t);
  const auto ref = power_iteration(chain.P);
  double num = 0, den = 0, dnum = 0;
  for (int i = 0; i < chain.n_states(); ++i) {
    den += ref[i] * chain.U(i);
    const bool sleep = i > 0 && i % 2 == 0;
    if (sleep) {
      num += ref[i] * chain.U(i);
      dnum += ref[i] * chain.U(i) * chain.U(i) / 2.0;
    }
  }
  const auto r = analyze(p, t, TimeBase{0.5});
  EXPECT_NEAR(r.ps, num / den, 1e-10);
  EXPECT_NEAR(r.mean_delay_ttis, dnum / den, 1e-8);
  EXPECT_NEAR(r.mean_delay_ms, 0.5 * dnum / den, 1e-8);
}

TEST(PowerSaving, DecreasesWithLoad) {
  const auto p = params(48, 144, 4);
  double prev = 1.0;
  for (double lam : {0.001, 0.005, 0.02, 0.05, 0.2}) {
    const double ps = analyze(p, PoissonTraffic{lam}, TimeBase{}).ps;
    EXPECT_LT(ps, prev);
    EXPECT_GT(ps, 0.0);
    prev = ps;
  }
}

// Brute-force nested sum over strictly decreasing chains d_1 > ... > d_k,
// d_j >= k - j + 1, weighted by (sum d) / prod_{i<k} (d_i - (k - i)).
double brute_burst_term(int k, int T) {
  double total = 0;
  std::vector<int> d(k + 1);
  std::function<void(int, int, double)> rec = [&](int j, int upper, double w) {
    if (j > k) {
      double s = 0;
      for (int i = 1; i <= k; ++i) s += d[i];
      total += s * w;
      return;
    }
    for (int v = k - j + 1; v <= upper; ++v) {
      d[j] = v;
      const double f = j < k ? 1.0 / (v - (k - j)) : 1.0;
      rec(j + 1, v - 1, w * f);
    }
  };
  rec(1, T, 1.0);
  return total;
}

TEST(CycleDelay, BurstTermMatchesBruteForce) {
  for (int T = 1; T <= 12; ++T)
    for (int k = 1; k <= std::min(T, 6); ++k)
      EXPECT_NEAR(detail::burst_delay_term(k, T), brute_burst_term(k, T), 1e-9 * (1 + brute_burst_term(k, T)))
          << "k=" << k << " T=" << T;
  EXPECT_EQ(detail::burst_delay_term(5, 4), 0.0);
}

TEST(CycleDelay, SingleBurstClosedForm) {
  EXPECT_NEAR(cycle_delay_single_burst(0.5, 32), 4.125, 1e-12);
  for (int T = 1; T <= 640; ++T)
    for (int i = 1; i <= 9; ++i) {
      const double q = i / 10.0;
      EXPECT_NEAR(cycle_delay_single_burst(q, T), q * (1 - q) * (T + 1) / 2.0, 1e-12) << "q=" << q << " T=" << T;
    }
}

TEST(CycleDelay, PoissonIsHalfWindow) {
  EXPECT_DOUBLE_EQ(cycle_delay(PoissonTraffic{0.3}, 64), 32.0);
  EXPECT_THROW(cycle_delay(PoissonTraffic{0.3}, 0), std::invalid_argument);
}

TEST(CycleDelay, BurstyIsFiniteAndGrowsWithWindow) {
  const TrafficSpec t = BurstyTraffic{0.01, 0.5};
  double prev = 0;
  for (int T : {16, 32, 64, 160, 640}) {
    const double d = cycle_delay(t, T);
    EXPECT_TRUE(std::isfinite(d));
    EXPECT_GT(d, prev);
    prev = d;
  }
}

TEST(MarkovBound, ClampsAndRejects) {
  EXPECT_DOUBLE_EQ(markov_delay_bound(5.0, 10.0), 0.5);
  EXPECT_DOUBLE_EQ(markov_delay_bound(50.0, 10.0), 1.0);
  EXPECT_THROW(markov_delay_bound(0.0, 10.0), std::invalid_argument);
  EXPECT_THROW(markov_delay_bound(1.0, -1.0), std::invalid_argument);
}

}  // namespace
