#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sipmlink/experiments.hpp"

using namespace sipmlink;

namespace {

LinkConfig ideal_at(double lambda_s_peak, double dark_rate, std::size_t n_bits) {
  LinkConfig cfg;
  cfg.link.dark_count_rate = dark_rate;
  cfg.link.avg_optical_power =
      power_for_lambda_s(lambda_s_peak, cfg.link.bit_time(), cfg.link.wavelength, cfg.link.pde) *
      cfg.link.ook_duty;
  cfg.n_bits = n_bits;
  cfg.mode = SimMode::kIdealCounts;
  return cfg;
}

LinkConfig small_waveform(std::size_t n_bits) {
  auto cfg = LinkConfig::experimental();
  cfg.mode = SimMode::kFullWaveform;
  cfg.link.avg_optical_power = dbm_to_watts(-75.0);
  cfg.link.dark_count_rate = 35e3;
  cfg.n_bits = n_bits;
  cfg.master_seed = RngSeed{21};
  return cfg;
}

}  // namespace

TEST(IdealCounts, BerAtRequiredLambda) {
  auto cfg = ideal_at(6.2146, 0.0, 200000);
  cfg.n_t = 0;
  const auto r = simulate_link(cfg);
  EXPECT_NEAR(r.report.ber, 1e-3, 3.0 * std::sqrt(1e-3 / 200000));
  EXPECT_NEAR(r.budget.lambda_s, 6.2146, 1e-9);
}

TEST(IdealCounts, NoSignalIsCoinFlip) {
  auto cfg = ideal_at(0.0, 0.0, 100000);
  const auto r = simulate_link(cfg);
  EXPECT_NEAR(r.report.ber, 0.5, 3.0 * std::sqrt(0.25 / 100000));
}

TEST(IdealCounts, BathtubOptimumMatchesTheory) {
  auto cfg = ideal_at(9.32, 0.048e6, 300000);
  const auto r = simulate_link(cfg);
  EXPECT_EQ(r.theory.n_t, 1);
  EXPECT_EQ(r.bathtub.optimum().n_t, 1);
  EXPECT_NEAR(r.report.ber, 1e-3, 3.0 * std::sqrt(1e-3 / 300000));
}

TEST(Waveform, ChunkSizeDoesNotChangeCounts) {
  auto cfg = small_waveform(3000);
  cfg.chunk_bits = 10000;
  const auto a = simulate_counts(cfg);
  for (std::size_t chunk : {1u, 7u, 1000u}) {
    cfg.chunk_bits = chunk;
    EXPECT_EQ(simulate_counts(cfg).counts.counts, a.counts.counts) << chunk;
  }
}

TEST(Waveform, DeterministicReport) {
  const auto cfg = small_waveform(2000);
  const auto a = link_report_table(cfg, simulate_link(cfg)).str();
  const auto b = link_report_table(cfg, simulate_link(cfg)).str();
  EXPECT_EQ(a, b);
  auto other = cfg;
  other.master_seed = RngSeed{22};
  EXPECT_NE(link_report_table(other, simulate_link(other)).str(), a);
}

TEST(Waveform, CountsAgreeWithIdealModel) {
  // At 100 kbps the in-bit rate is low enough that pulse pile-up is negligible.
  auto cfg = small_waveform(4000);
  cfg.link.data_rate = 1e5;
  cfg.link.avg_optical_power = dbm_to_watts(-85.0);
  const auto c = simulate_counts(cfg);
  const auto budget = budget_for(cfg.link);
  const auto ones = std::count(c.tx.bits.begin(), c.tx.bits.end(), 1);
  const double expected = budget.lambda_s * static_cast<double>(ones) + budget.lambda_b * cfg.n_bits;
  const auto total = std::accumulate(c.counts.counts.begin(), c.counts.counts.end(), 0.0);
  EXPECT_NEAR(total / expected, 1.0, 4.0 / std::sqrt(expected));
  const auto r = simulate_link(cfg);
  EXPECT_NEAR(r.report.ber, r.theory.pe, 4.0 * std::sqrt(r.theory.pe / cfg.n_bits));
}

TEST(Waveform, ChainIsTransparentAtModerateRates) {
  auto cfg = LinkConfig::experimental();
  cfg.master_seed = RngSeed{4};
  const double power = 1e5 / detected_rate(1.0, cfg.link.wavelength, cfg.link.pde);
  const auto rate = measure_count_rate(cfg, power, 0.01);
  EXPECT_NEAR(rate.counts_per_s / (1e5 + cfg.link.dark_count_rate), 1.0, 0.05);
}

TEST(Waveform, DarkPlateau) {
  auto cfg = LinkConfig::experimental();
  cfg.master_seed = RngSeed{5};
  std::vector<double> grid;
  for (int mv = 10; mv <= 30; mv += 4) grid.push_back(mv * 1e-3);
  const auto rows = run_threshold_sweep(cfg, grid, HysteresisRule::fixed(5e-3), 0.0, 0.05);
  ASSERT_EQ(rows.size(), grid.size());
  for (const auto& r : rows) EXPECT_NEAR(r.counts_per_second / 30e3, 1.0, 0.1) << r.v_th;
}

TEST(GbpStudy, SinglePhotonRegimes) {
  const auto frac = [](double gain, double bw) {
    return single_pe_statistics(LinkConfig::gbp_study({gain, bw}), 200).counted_fraction;
  };
  EXPECT_EQ(frac(1.0, 500e6), 0.0);
  EXPECT_EQ(frac(120.0, 1e6), 1.0);
  EXPECT_LT(frac(40.0, 2e6), 0.5);
}

TEST(Theory, PowerPenaltyTables) {
  const std::vector<double> lb{0.0, 0.048, 1.0};
  const std::vector<double> dark{0.0, 30e3};
  const std::vector<double> rates{1e4, 1e6};
  const auto t = run_power_penalty(lb, dark, rates);
  ASSERT_EQ(t.outer.size(), 3u);
  EXPECT_NEAR(t.outer[0].lambda_s, 6.2146, 1e-3);
  EXPECT_NEAR(t.outer[1].lambda_s, 9.32, 0.05);
  EXPECT_LT(t.outer[1].lambda_s, t.outer[2].lambda_s);
  ASSERT_EQ(t.inset.size(), 4u);
  for (const auto& r : t.inset) {
    EXPECT_NEAR(r.lambda_b, r.dark_rate / r.data_rate, 1e-12);
    EXPECT_NEAR(r.avg_power_w, required_avg_power(r.dark_rate, r.data_rate, 1e-3, 0.036), 1e-24);
  }
  EXPECT_EQ(power_penalty_table(t.outer).header(),
            (std::vector<std::string>{"lambda_b", "lambda_s", "n_t"}));
}

TEST(Theory, SlowerLinksNeedLessPower) {
  EXPECT_LT(required_avg_power(30e3, 1e4, 1e-3, 0.036), required_avg_power(30e3, 1e6, 1e-3, 0.036));
}

TEST(Sweep, NtSweepInIdealMode) {
  auto cfg = ideal_at(9.32, 0.048e6, 20000);
  SweepSpec spec{SweepVariable::kNt, {0, 1, 2, 3}, ""};
  const auto t = run_sweep(cfg, spec);
  EXPECT_EQ(t.rows().size(), 4u);
  EXPECT_EQ(parse_sweep_variable("v_th"), SweepVariable::kVth);
  EXPECT_THROW(parse_sweep_variable("nope"), std::invalid_argument);
}
