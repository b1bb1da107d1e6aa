#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "sipmlink/analog_chain.hpp"

using namespace sipmlink;

namespace {

Waveform constant(double v, std::size_t n, double fs = 1e9) {
  Waveform w;
  w.sample_rate = fs;
  w.samples.assign(n, v);
  return w;
}

double stddev(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

double peak(const Waveform& w) { return *std::max_element(w.samples.begin(), w.samples.end()); }

Waveform single_pulse(double fs, double t_event = 100e-9, double duration = 2e-6) {
  EventTimes ev{{t_event}, duration};
  return synth_waveform(ev, PulseTemplate(SiPMParams::calibrated()), fs, duration);
}

Waveform random_walk(std::size_t n, RngSeed seed, double scale) {
  Rng rng(seed, StreamId::kUser);
  Waveform w;
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v = 0.9 * v + scale * rng.normal();
    w.samples.push_back(v);
  }
  return w;
}

}  // namespace

TEST(LowPass, UnityDcGain) {
  const double fc = 10e6;
  const auto y = first_order_lpf(constant(0.7, 2000), fc);
  const double tau_samples = 1e9 / (2.0 * std::numbers::pi * fc);
  const auto settled = static_cast<std::size_t>(std::ceil(7.0 * tau_samples));
  EXPECT_NEAR(y.samples[settled], 0.7, 0.7e-3);
  EXPECT_NEAR(y.samples.back(), 0.7, 1e-9);
}

TEST(LowPass, MinusThreeDecibelsAtCutoff) {
  const double fs = 1e9;
  const double fc = 10e6;
  Waveform w;
  w.sample_rate = fs;
  for (int i = 0; i < 20000; ++i) w.samples.push_back(std::sin(2.0 * std::numbers::pi * fc * i / fs));
  const auto y = first_order_lpf(w, fc);
  const double amp = *std::max_element(y.samples.begin() + 10000, y.samples.end());
  EXPECT_NEAR(20.0 * std::log10(amp), -3.0, 0.5);
}

TEST(LowPass, WideBandKeepsPulseWidth) {
  const auto w = single_pulse(10e9);
  const auto y = first_order_lpf(w, 500e6);
  EXPECT_NEAR(measure_fwhm(y) / measure_fwhm(w), 1.0, 0.05);
}

TEST(LowPass, RejectsCutoffOutOfRange) {
  EXPECT_THROW(first_order_lpf(constant(1, 10), 0.0), std::invalid_argument);
  EXPECT_THROW(first_order_lpf(constant(1, 10), 0.6e9), std::invalid_argument);
}

TEST(LowPass, StreamingMatchesRecurrence) {
  const auto w = random_walk(5000, RngSeed{1}, 1.0);
  const double alpha = 1.0 - std::exp(-2.0 * std::numbers::pi * 20e6 / 1e9);
  const auto y = first_order_lpf(w, 20e6);
  double ref = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    ref = ref + alpha * (w.samples[i] - ref);
    ASSERT_NEAR(y.samples[i], ref, 1e-12);
  }
}

TEST(Gain, Linearity) {
  const auto w = single_pulse(1e9);
  EXPECT_EQ(apply_gain(w, 1.0).samples, w.samples);
  Waveform p = constant(0.66e-3, 4);
  EXPECT_NEAR(apply_gain(p, 20.0).samples[0], 13.2e-3, 1e-15);
  EXPECT_EQ(apply_gain(apply_gain(w, 2.0), 4.0).samples, apply_gain(w, 8.0).samples);
  EXPECT_THROW(apply_gain(w, 0.0), std::invalid_argument);
}

TEST(Noise, ZeroPsdIsIdentity) {
  const auto w = single_pulse(1e9);
  NoiseConfig cfg;
  cfg.input_psd = 0.0;
  EXPECT_EQ(add_noise(w, cfg, 500e6).samples, w.samples);
}

TEST(Noise, SigmaMatchesConfiguration) {
  NoiseConfig cfg;
  cfg.input_psd = 0.2e-3 / std::sqrt(500e6);
  cfg.seed = RngSeed{5};
  const auto n = add_noise(constant(0.0, 1000000), cfg, 500e6);
  EXPECT_NEAR(stddev(n.samples), 0.2e-3, 0.004e-3);
  const auto half = add_noise(constant(0.0, 1000000), cfg, 250e6);
  EXPECT_NEAR(stddev(n.samples) / stddev(half.samples), std::sqrt(2.0), 0.03 * std::sqrt(2.0));
}

TEST(Noise, DeterministicPerSeed) {
  NoiseConfig cfg;
  cfg.seed = RngSeed{3};
  EXPECT_EQ(add_noise(constant(0, 100), cfg, 1e8).samples, add_noise(constant(0, 100), cfg, 1e8).samples);
}

TEST(GbpChain, RegimesOnCalibratedPulse) {
  const auto w = single_pulse(10e9, 100e-9, 4e-6);
  NoiseConfig noise;
  noise.input_psd = 0.0;
  const NoiseConfig calibrated;
  EXPECT_LT(peak(gbp_chain(w, {1.0, 500e6}, noise)), kMinComparatorThreshold);
  const double sigma = calibrated.sigma(6e6, 20.0);
  EXPECT_GT(peak(gbp_chain(w, {20.0, 6e6}, noise)), kMinComparatorThreshold + 5.0 * sigma);
  EXPECT_LT(peak(gbp_chain(w, {40.0, 2e6}, noise)), kMinComparatorThreshold);
}

TEST(Comparator, CleanPulses) {
  const auto w = apply_gain(single_pulse(1e9), 100.0);
  const auto t = comparator(w, {10e-3, 2e-3});
  EXPECT_EQ(t.rises.size(), 1u);
  EXPECT_EQ(t.falls.size(), 1u);
  EXPECT_TRUE(comparator(w, {30e-3, 2e-3}).rises.empty());
}

TEST(Comparator, HysteresisPreventsRetrigger) {
  // Rise above v_th, then a tail oscillating between the two thresholds.
  Waveform w;
  w.samples = {0.0, 0.0, 20e-3, 19e-3};
  for (int i = 0; i < 50; ++i) w.samples.push_back(i % 2 ? 19e-3 : 14e-3);
  w.samples.insert(w.samples.end(), {5e-3, 0.0});
  const auto t = comparator(w, {18e-3, 5e-3});
  EXPECT_EQ(t.rises.size(), 1u);
  EXPECT_EQ(t.falls.size(), 1u);
  EXPECT_GT(comparator(w, {18e-3, 0.0}).rises.size(), 1u);
}

TEST(Comparator, ZeroHysteresisIsPlainThreshold) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto w = random_walk(3000, RngSeed{s}, 1.0);
    const auto t = comparator(w, {0.5, 0.0});
    std::size_t rises = 0;
    bool prev = false;
    for (double v : w.samples) {
      const bool now = v > 0.5;
      if (now && !prev) ++rises;
      prev = now;
    }
    EXPECT_EQ(t.rises.size(), rises);
  }
}

TEST(Comparator, AlternationInvariant) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = comparator(random_walk(5000, RngSeed{s}, 1.0), {0.8, 0.3});
    EXPECT_NO_THROW(t.check_alternation());
  }
}

TEST(Comparator, RejectsBadConfig) {
  EXPECT_THROW(comparator(constant(0, 3), {1e-3, 2e-3}), std::invalid_argument);
}

TEST(MinWidth, FiltersShortPulses) {
  DigitalPulseTrain t;
  t.rises = {0.0, 100e-9, 200e-9, 300e-9};
  t.falls = {4e-9, 106e-9, 205e-9};
  EXPECT_EQ(min_width_filter(t, 0.0).rises, t.rises);
  const auto f = min_width_filter(t, kDefaultMinPulseWidth);
  EXPECT_EQ(f.rises, (std::vector<double>{100e-9, 200e-9, 300e-9}));
  EXPECT_EQ(f.falls, (std::vector<double>{106e-9, 205e-9}));
}

TEST(DcBlock, RemovesOffset) {
  const auto y = dc_block(constant(1.0, 200000), 1e6);
  EXPECT_NEAR(y.samples.back(), 0.0, 1e-6);
}

TEST(DcBlock, DenseTrainOscillatesAroundZero) {
  const auto p = SiPMParams::calibrated();
  const auto ev = homogeneous_poisson(1e8, 200e-6, RngSeed{6});
  const auto w = synth_waveform(ev, PulseTemplate(p), 1e9, 200e-6);
  const auto y = dc_block(w, 100e3);
  const double mean_dc = std::accumulate(w.samples.begin() + 100000, w.samples.end(), 0.0) / 100000;
  const double mean_ac = std::accumulate(y.samples.begin() + 100000, y.samples.end(), 0.0) / 100000;
  EXPECT_GT(mean_dc, 0.5 * p.single_pe_amplitude);
  EXPECT_LT(std::abs(mean_ac), 0.05 * p.single_pe_amplitude);
}

TEST(DcBlock, IsolatedPulseKeepsAmplitude) {
  const auto w = single_pulse(1e9);
  EXPECT_NEAR(peak(dc_block(w, 100e3)) / peak(w), 1.0, 0.05);
}

TEST(ThresholdSweep, AboveMaximumCountsNothing) {
  const auto w = apply_gain(single_pulse(1e9), 100.0);
  const std::vector<double> grid{0.1, 0.2};
  for (const auto& r : threshold_sweep(w, grid, HysteresisRule::fixed(5e-3))) {
    EXPECT_EQ(r.counts_per_second, 0.0);
  }
}

TEST(ThresholdSweep, MonotoneAboveNoise) {
  const auto p = SiPMParams::calibrated();
  std::vector<double> grid;
  for (int mv = 8; mv <= 60; mv += 2) grid.push_back(mv * 1e-3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    // Random isolated pulses: at least 300 ns apart.
    Rng rng(RngSeed{s}, StreamId::kUser);
    EventTimes ev{{}, 2e-3};
    for (double t = 50e-9 + rng.exponential(2e5); t < 2e-3 - 200e-9; t += 300e-9 + rng.exponential(2e5)) {
      ev.times.push_back(t);
    }
    auto w = apply_gain(synth_waveform(ev, PulseTemplate(p), 1e9, 2e-3, {0.05, RngSeed{s}}), 170.0);
    NoiseConfig n;
    n.seed = RngSeed{s};
    w = add_noise(w, n, 400e6, 170.0);
    const auto rows = threshold_sweep(w, grid, HysteresisRule::fraction(0.25));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_LE(rows[i].counts_per_second, rows[i - 1].counts_per_second) << rows[i].v_th;
    }
    EXPECT_EQ(rows.front().counts_per_second, static_cast<double>(ev.times.size()) / 2e-3);
    EXPECT_EQ(rows.back().counts_per_second, 0.0);
  }
  const std::vector<double> unsorted{2e-3, 1e-3};
  EXPECT_THROW(threshold_sweep(Waveform{}, unsorted, HysteresisRule::fixed(0.0)), std::invalid_argument);
}

TEST(AnalogChain, StreamingMatchesBatchOps) {
  const auto p = SiPMParams::calibrated();
  const auto ev = homogeneous_poisson(5e6, 100e-6, RngSeed{2});
  const auto w = synth_waveform(ev, PulseTemplate(p), 1e9, 100e-6);
  AnalogChainConfig cfg;
  cfg.amp = {180.0, 400e6};
  cfg.noise.seed = RngSeed{2};
  cfg.comparator = {18e-3, 5e-3};
  const auto batch =
      min_width_filter(comparator(gbp_chain(w, cfg.amp, cfg.noise), cfg.comparator), cfg.min_width);

  AnalogChain chain(cfg, 1e9);
  std::vector<double> buf = w.samples;
  std::size_t pos = 0;
  for (std::size_t n : {1u, 7u, 1000u, 33333u}) {
    chain.process(std::span<double>(buf.data() + pos, n));
    pos += n;
  }
  chain.process(std::span<double>(buf.data() + pos, buf.size() - pos));
  const auto streamed = chain.finish();
  EXPECT_EQ(streamed.rises, batch.rises);
  EXPECT_EQ(streamed.falls, batch.falls);
  EXPECT_GT(batch.size(), 300u);
}

TEST(AmplifierConfig, FromGbp) {
  const auto a = AmplifierConfig::from_gbp(120e6, 20.0);
  EXPECT_DOUBLE_EQ(a.bandwidth, 6e6);
  EXPECT_NEAR(a.gbp(), 120e6, 120e6 * 1e-9);
  EXPECT_THROW(a.validate(10e6), std::invalid_argument);
  EXPECT_NO_THROW(a.validate(1e9));
}
