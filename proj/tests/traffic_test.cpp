#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "drxlab/traffic.hpp"

namespace {

using namespace drx;

TEST(NoArrivalProb, PoissonIsExponentialSurvival) {
  const TrafficSpec t = PoissonTraffic{0.02};
  EXPECT_NEAR(no_arrival_prob(t, 50), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(no_arrival_prob(t, 1), std::exp(-0.02), 1e-15);
  EXPECT_DOUBLE_EQ(no_arrival_prob(PoissonTraffic{0.0}, 640), 1.0);
}

TEST(NoArrivalProb, BurstyUsesFirstArrivalMass) {
  const TrafficSpec t = BurstyTraffic{0.1, 0.5};
  EXPECT_NEAR(no_arrival_prob(t, 1), 0.1, 1e-15);
  EXPECT_NEAR(no_arrival_prob(t, 3), 0.1 * 0.81, 1e-15);
}

TEST(NoArrivalProb, RejectsNonPositiveWindow) {
  EXPECT_THROW(no_arrival_prob(PoissonTraffic{0.1}, 0), std::invalid_argument);
}

TEST(TrafficSpec, MeanRateAndActivation) {
  EXPECT_DOUBLE_EQ(mean_rate(PoissonTraffic{0.3}), 0.3);
  const double p = activation_from_rate(0.02, 0.5);
  EXPECT_NEAR(p, 0.02 / 1.5, 1e-15);
  EXPECT_NEAR(mean_rate(BurstyTraffic{p, 0.5}), 0.02, 1e-15);
  EXPECT_THROW(activation_from_rate(1.8, 0.5), InfeasibleRate);
  EXPECT_THROW(activation_from_rate(0.1, 1.0), std::invalid_argument);
}

TEST(TrafficSpec, Validation) {
  EXPECT_THROW(validate(TrafficSpec{PoissonTraffic{-1.0}}), std::invalid_argument);
  EXPECT_THROW(validate(TrafficSpec{BurstyTraffic{0.0, 0.5}}), std::invalid_argument);
  EXPECT_THROW(validate(TrafficSpec{BurstyTraffic{0.5, 1.0}}), std::invalid_argument);
  EXPECT_THROW(validate(TimeBase{0.0}), std::invalid_argument);
  EXPECT_NO_THROW(validate(TrafficSpec{BurstyTraffic{1.0, 0.0}}));
}

TEST(TrafficSpec, PerTtiRateScalesWithTti) {
  EXPECT_DOUBLE_EQ(per_tti_rate(20.0, TimeBase{1.0}), 0.02);
  EXPECT_DOUBLE_EQ(per_tti_rate(20.0, TimeBase{0.125}), 0.0025);
}

TEST(BurstLength, PmfSumsToOne) {
  for (double q : {0.0, 0.1, 0.5, 0.9}) {
    double s = 0.0;
    for (int k = 0; k < 2000; ++k) s += burst_length_pmf(q, k);
    EXPECT_NEAR(s, 1.0, 1e-12) << "q=" << q;
  }
}

TEST(Seeds, RunSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(run_seed(42, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(run_seed(42, 7), run_seed(42, 7));
  EXPECT_NE(run_seed(42, 7), run_seed(43, 7));
}

TEST(Seeds, Uniform01InUnitInterval) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

// Mean over batches; the standard error comes from the spread of batch
// means, which also covers the correlated bursty source.
struct BatchMean {
  double mean;
  double se;
};

BatchMean batch_mean(const ArrivalTrace& tr, int batches) {
  const std::size_t per = tr.counts.size() / static_cast<std::size_t>(batches);
  std::vector<double> m;
  for (int b = 0; b < batches; ++b) {
    double s = 0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += tr.counts[i];
    m.push_back(s / static_cast<double>(per));
  }
  const double mean = std::accumulate(m.begin(), m.end(), 0.0) / batches;
  double var = 0;
  for (double x : m) var += (x - mean) * (x - mean);
  var /= batches - 1;
  return {mean, std::sqrt(var / batches)};
}

TEST(ArrivalSampler, PoissonRateMatches) {
  const double lambda = 0.02;
  Rng rng(11);
  const auto tr = sample_arrivals(PoissonTraffic{lambda}, 10'000'000, rng);
  const double total = std::accumulate(tr.counts.begin(), tr.counts.end(), 0.0);
  const double n = static_cast<double>(tr.horizon());
  EXPECT_NEAR(total / n, lambda, 3.0 * std::sqrt(lambda / n));
}

TEST(ArrivalSampler, PoissonHighRateHasPoissonVariance) {
  const double lambda = 2.5;
  Rng rng(12);
  const auto tr = sample_arrivals(PoissonTraffic{lambda}, 1'000'000, rng);
  double s = 0, s2 = 0;
  for (auto c : tr.counts) {
    s += c;
    s2 += static_cast<double>(c) * c;
  }
  const double n = static_cast<double>(tr.horizon());
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, lambda, 0.01);
  EXPECT_NEAR(var, lambda, 0.03);
}

class BurstyRate : public ::testing::TestWithParam<double> {};

TEST_P(BurstyRate, EmpiricalRateMatchesMean) {
  const double q = GetParam();
  const double lambda = 0.02;
  const BurstyTraffic spec{activation_from_rate(lambda, q), q};
  Rng rng(13);
  const auto tr = sample_arrivals(spec, 10'000'000, rng);
  const auto bm = batch_mean(tr, 100);
  EXPECT_NEAR(bm.mean, lambda, 3.0 * bm.se) << "se=" << bm.se;
}

INSTANTIATE_TEST_SUITE_P(Burstiness, BurstyRate, ::testing::Values(0.0, 0.5, 0.9));

TEST(ArrivalSampler, BurstLengthsAreGeometric) {
  const double q = 0.5;
  Rng rng(14);
  const auto tr = sample_arrivals(BurstyTraffic{activation_from_rate(0.02, q), q}, 5'000'000, rng);
  // Runs of consecutive busy TTIs. Two bursts can touch, which only shifts
  // mass to longer runs by O(hazard).
  std::vector<double> hist(6, 0.0);
  double runs = 0;
  std::size_t len = 0;
  for (auto c : tr.counts) {
    ASSERT_LE(c, 1u);
    if (c) {
      ++len;
    } else if (len) {
      if (len - 1 < hist.size()) hist[len - 1] += 1;
      runs += 1;
      len = 0;
    }
  }
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(hist[k] / runs, burst_length_pmf(q, k), 0.02) << "k=" << k;
}

TEST(ArrivalSampler, SameSeedSameTrace) {
  Rng a(99), b(99);
  const TrafficSpec t = BurstyTraffic{0.01, 0.3};
  EXPECT_EQ(sample_arrivals(t, 50000, a).counts, sample_arrivals(t, 50000, b).counts);
}

}  // namespace
