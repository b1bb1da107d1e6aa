#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sipmlink/photon_process.hpp"

using namespace sipmlink;

TEST(HomogeneousPoisson, ZeroRateIsEmpty) {
  EXPECT_TRUE(homogeneous_poisson(0.0, 1.0, RngSeed{1}).empty());
}

TEST(HomogeneousPoisson, RejectsBadArguments) {
  EXPECT_THROW(homogeneous_poisson(-1.0, 1.0, RngSeed{1}), std::invalid_argument);
  EXPECT_THROW(homogeneous_poisson(1.0, 0.0, RngSeed{1}), std::invalid_argument);
}

TEST(HomogeneousPoisson, DarkRateCountsAcrossSeeds) {
  int inside = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const auto ev = homogeneous_poisson(30e3, 1.0, RngSeed{static_cast<std::uint64_t>(s)});
    if (std::abs(static_cast<double>(ev.size()) - 30e3) <= 3.0 * std::sqrt(30e3)) ++inside;
  }
  EXPECT_GE(inside, 197);
}

TEST(HomogeneousPoisson, InterArrivalsAreExponential) {
  const double rate = 1e6;
  const auto ev = homogeneous_poisson(rate, 0.01, RngSeed{7});
  std::vector<double> gaps;
  double prev = 0.0;
  for (double t : ev.times) {
    gaps.push_back(t - prev);
    prev = t;
  }
  std::sort(gaps.begin(), gaps.end());
  // Kolmogorov-Smirnov against exponential(rate).
  double d = 0.0;
  const double n = static_cast<double>(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * gaps[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n),
                  std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(n));
}

TEST(HomogeneousPoisson, SortedInsideWindowAndDeterministic) {
  const auto a = homogeneous_poisson(5e5, 0.002, RngSeed{3});
  const auto b = homogeneous_poisson(5e5, 0.002, RngSeed{3});
  const auto c = homogeneous_poisson(5e5, 0.002, RngSeed{4});
  EXPECT_EQ(a.times, b.times);
  EXPECT_NE(a.times, c.times);
  EXPECT_TRUE(std::is_sorted(a.times.begin(), a.times.end()));
  for (double t : a.times) {
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, 0.002);
  }
}

TEST(OokSignal, AllZeroBitsGiveNothing) {
  BitStream bits{std::vector<std::uint8_t>(64, 0), 1e-6};
  EXPECT_TRUE(ook_signal_events(bits, 1e7, RngSeed{1}).empty());
}

TEST(OokSignal, MeanCountPerOneBit) {
  BitStream one{{1}, 1e-6};
  Rng rng(RngSeed{11}, StreamId::kSignal);
  double total = 0.0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) total += static_cast<double>(ook_signal_events(one, 9.32e6, rng).size());
  EXPECT_NEAR(total / trials, 9.32, 0.0932);
}

TEST(OokSignal, EventsOnlyInsideOneBits) {
  BitStream bits;
  bits.bit_time = 1e-6;
  for (int i = 0; i < 1000; ++i) bits.bits.push_back(i % 2);
  const auto ev = ook_signal_events(bits, 5e6, RngSeed{5});
  ASSERT_FALSE(ev.empty());
  for (double t : ev.times) {
    const auto k = static_cast<std::size_t>(std::floor(t / bits.bit_time));
    EXPECT_EQ(bits.bits[k], 1) << t;
  }
}

TEST(Merge, IdentityCommutativityAndLength) {
  const auto a = homogeneous_poisson(1e5, 0.01, RngSeed{1});
  const auto b = homogeneous_poisson(1e5, 0.01, RngSeed{2});
  EventTimes empty;
  empty.duration = 0.01;
  EXPECT_EQ(merge(a, empty).times, a.times);
  const auto ab = merge(a, b);
  EXPECT_EQ(ab.times, merge(b, a).times);
  EXPECT_EQ(ab.size(), a.size() + b.size());
  EXPECT_TRUE(std::is_sorted(ab.times.begin(), ab.times.end()));
}

TEST(Merge, SuperpositionDoublesRate) {
  Rng r1(RngSeed{21}, StreamId::kSignal);
  Rng r2(RngSeed{21}, StreamId::kDark);
  const auto m = merge(homogeneous_poisson(2e5, 0.5, r1), homogeneous_poisson(2e5, 0.5, r2));
  EXPECT_NEAR(static_cast<double>(m.size()), 2e5, 4.0 * std::sqrt(2e5));
}

TEST(Superposition, PerBitCountsArePoisson) {
  // Alternating bits; lambda_s = 3 in 1-bits, lambda_b = 0.5 everywhere.
  BitStream bits;
  bits.bit_time = 1e-6;
  const std::size_t n = 200000;
  for (std::size_t i = 0; i < n; ++i) bits.bits.push_back(i % 2);
  Rng rs(RngSeed{9}, StreamId::kSignal);
  Rng rd(RngSeed{9}, StreamId::kDark);
  const auto ev = merge(ook_signal_events(bits, 3e6, rs),
                        homogeneous_poisson(0.5e6, bits.duration(), rd));
  const auto counts = oracle::naive_binning(ev.times, bits.bit_time, n);

  for (int parity = 0; parity < 2; ++parity) {
    const double mean = parity ? 3.5 : 0.5;
    const int bins = parity ? 9 : 4;  // last bin collects the tail
    std::vector<double> observed(bins, 0.0);
    for (std::size_t i = parity; i < n; i += 2) observed[std::min<int>(counts[i], bins - 1)] += 1.0;
    double chi2 = 0.0;
    double cum = 0.0;
    const double m = static_cast<double>(n / 2);
    for (int k = 0; k < bins; ++k) {
      const double p = k + 1 < bins ? static_cast<double>(oracle::poisson_pmf(k, mean)) : 1.0 - cum;
      cum += p;
      chi2 += (observed[k] - m * p) * (observed[k] - m * p) / (m * p);
    }
    // 0.1% critical values for bins - 1 degrees of freedom.
    EXPECT_LT(chi2, parity ? 26.1 : 16.3) << "parity " << parity;
  }
}
