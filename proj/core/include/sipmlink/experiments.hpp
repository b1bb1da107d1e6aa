#pragma once

// End-to-end pipeline and the sweep scenarios built on it. Every function
// here is a pure function of its arguments (including the master seed).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sipmlink/csv.hpp"
#include "sipmlink/link_config.hpp"

namespace sipmlink {

struct LinkResult {
  BerReport report;
  Bathtub bathtub;
  /// Expected photons per bit for the configured link.
  PhotonBudget budget;
  /// Poisson-limit optimum for `budget`.
  ThresholdDecision theory;
  std::uint64_t total_counts = 0;
};

/// Ideal-counts mode draws each bit's count straight from Poisson(lambda_s +
/// lambda_b) or Poisson(lambda_b). Full-waveform mode runs events ->
/// microcell dead time -> pulse synthesis -> analog chain -> interleaved
/// counters, in chunks of cfg.chunk_bits bits. The report uses cfg.n_t when
/// set, else the bathtub optimum.
LinkResult simulate_link(const LinkConfig& cfg);

/// Per-bit counts behind simulate_link, with the transmitted bits.
struct LinkCounts {
  BitStream tx;
  BitWindowCounts counts;
};
LinkCounts simulate_counts(const LinkConfig& cfg);

/// Header: mode,data_rate_bps,avg_power_w,avg_power_dbm,lambda_s,lambda_b,bits,errors,ber,n_t,theory_pe,theory_n_t
CsvTable link_report_table(const LinkConfig& cfg, const LinkResult& result);
/// Header: n_t,bits,errors,ber
CsvTable bathtub_table(const Bathtub& bathtub);

/// How long to integrate a continuous-light point: long enough for
/// `target_counts` expected counts, clamped to [min_duration, max_duration].
struct DurationPolicy {
  double target_counts = 2e5;
  double min_duration = 1e-4;
  double max_duration = 0.1;

  double duration_for(double expected_rate) const;
};

/// Continuous (unmodulated) illumination at `optical_power` watts plus dark
/// counts, through the full waveform pipeline for `duration` seconds.
/// Returns one edge train per comparator setting, before the width filter.
std::vector<DigitalPulseTrain> continuous_light_edges(const LinkConfig& cfg, double optical_power,
                                                      double duration,
                                                      std::span<const ComparatorConfig> comparators);

struct CountRate {
  std::uint64_t counts = 0;
  double duration = 0.0;
  double counts_per_s = 0.0;
};
/// Counted pulses per second with the configured comparator and width filter.
CountRate measure_count_rate(const LinkConfig& cfg, double optical_power, double duration);

struct DynamicRangeRow {
  double avg_power_w = 0.0;
  double counts_per_s = 0.0;
  double theory_counts_per_s = 0.0;
};
/// Theory column: detected_rate(power) + dark_count_rate.
std::vector<DynamicRangeRow> run_dynamic_range(const LinkConfig& cfg,
                                               std::span<const double> power_grid,
                                               const DurationPolicy& policy = {});
/// Header: avg_power_w,counts_per_s,theory_counts_per_s
CsvTable dynamic_range_table(std::span<const DynamicRangeRow> rows);

/// Streaming threshold sweep under continuous light (0 W gives dark only).
std::vector<ThresholdSweepRow> run_threshold_sweep(const LinkConfig& cfg,
                                                   std::span<const double> v_th_grid,
                                                   HysteresisRule rule, double optical_power,
                                                   double duration);
/// Header: v_th_volts,counts_per_second
CsvTable threshold_sweep_table(std::span<const ThresholdSweepRow> rows);

struct BerRow {
  double data_rate = 0.0;
  double avg_power_w = 0.0;
  std::uint64_t n_bits = 0;
  std::uint64_t n_errors = 0;
  double ber = 0.0;
  int n_t = 0;
  double theory_pe = 0.0;
  int theory_n_t = 0;
};
/// One simulate_link per (data rate, power). With collection_time > 0 each
/// point runs data_rate * collection_time bits, otherwise cfg.n_bits.
std::vector<BerRow> run_ber_vs_power(const LinkConfig& cfg, std::span<const double> power_grid,
                                     std::span<const double> data_rates,
                                     double collection_time = 0.0);
/// Header: data_rate_bps,avg_power_w,avg_power_dbm,bits,errors,ber,n_t,theory_pe,theory_n_t
CsvTable ber_table(std::span<const BerRow> rows);

struct GbpStudySpec {
  /// Amplifier settings; the GBP of each is gain * bandwidth.
  std::vector<AmplifierConfig> configs;
  /// Continuous optical powers (W) for the counts table.
  std::vector<double> power_grid;
  std::vector<double> data_rates;
  std::size_t n_pulses = 1000;
  double target_pe = 1e-3;
  DurationPolicy counts_duration{2e4, 1e-4, 5e-3};

  /// Nine gain/bandwidth pairs at 500, 120 and 80 MHz GBP, -100..-60 dBm,
  /// 10 kbps..1 Mbps.
  static GbpStudySpec standard();
};

struct PulseStatsRow {
  AmplifierConfig amp;
  std::size_t n_pulses = 0;
  double peak_mean = 0.0;
  double peak_std = 0.0;
  double counted_fraction = 0.0;
};

struct GbpCountsRow {
  AmplifierConfig amp;
  double avg_power_w = 0.0;
  double counts_per_s = 0.0;
  double theory_counts_per_s = 0.0;
};

struct RequiredPowerRow {
  /// "simulated" or "theory".
  std::string label;
  AmplifierConfig amp;
  double data_rate = 0.0;
  /// +inf when the measured count curve never reaches the target.
  double required_avg_power_w = 0.0;
};

struct GbpStudyResult {
  std::vector<PulseStatsRow> pulse_stats;
  std::vector<GbpCountsRow> counts;
  std::vector<RequiredPowerRow> required_power;
};

/// Isolated single-photon pulses (no dark counts) through the chain: peak
/// amplitude statistics and the fraction that produce a counted pulse.
PulseStatsRow single_pe_statistics(const LinkConfig& cfg, std::size_t n_pulses);

/// `base` supplies the SiPM, noise, comparator, width filter, sample rate,
/// link and seed; each study config replaces only the amplifier. Required
/// powers invert the measured signal-count curve (counts minus the
/// zero-power counts) for lambda_s* at each data rate, using the measured
/// dark rate for lambda_b.
GbpStudyResult run_gbp_study(const LinkConfig& base, const GbpStudySpec& spec);
/// Header: gbp_hz,gain,bandwidth_hz,pulses,peak_mean_v,peak_std_v,counted_fraction
CsvTable pulse_stats_table(std::span<const PulseStatsRow> rows);
/// Header: gbp_hz,gain,bandwidth_hz,avg_power_w,counts_per_s,theory_counts_per_s
CsvTable gbp_counts_table(std::span<const GbpCountsRow> rows);
/// Header: label,gbp_hz,gain,bandwidth_hz,data_rate_bps,required_avg_power_w,required_avg_power_dbm
CsvTable required_power_table(std::span<const RequiredPowerRow> rows);

struct PowerPenaltyInsetRow {
  double dark_rate = 0.0;
  double data_rate = 0.0;
  double lambda_b = 0.0;
  double lambda_s = 0.0;
  double avg_power_w = 0.0;
};
struct PowerPenaltyTables {
  std::vector<PowerPenaltyRow> outer;
  std::vector<PowerPenaltyInsetRow> inset;
};
/// Pure theory: lambda_s* against lambda_b, and required average power for
/// every (dark rate, data rate) pair.
PowerPenaltyTables run_power_penalty(std::span<const double> lambda_b_grid,
                                     std::span<const double> dark_rates,
                                     std::span<const double> data_rates, double target_pe = 1e-3,
                                     double pde = 0.036,
                                     double wavelength = constants::kDefaultWavelength);
/// Header: lambda_b,lambda_s,n_t
CsvTable power_penalty_table(std::span<const PowerPenaltyRow> rows);
/// Header: dark_rate_cps,data_rate_bps,lambda_b,lambda_s,avg_power_w,avg_power_dbm
CsvTable power_penalty_inset_table(std::span<const PowerPenaltyInsetRow> rows);

enum class SweepVariable { kOpticalPower, kVth, kNt, kDataRate, kGbp };
SweepVariable parse_sweep_variable(const std::string& text);

struct SweepSpec {
  SweepVariable variable = SweepVariable::kOpticalPower;
  std::vector<double> grid;
  /// JSON object merged over the base config before sweeping (may be empty).
  std::string overrides;

  void validate() const;
};

/// Runs one sweep and returns its table:
///   optical_power -> dynamic_range_table
///   v_th          -> threshold_sweep_table (fixed hysteresis from the config,
///                    continuous light at the configured average power)
///   n_t           -> bathtub_table restricted to the grid
///   data_rate     -> ber_table at the configured power
///   gbp           -> pulse_stats_table at the configured gain
CsvTable run_sweep(const LinkConfig& cfg, const SweepSpec& spec,
                   const DurationPolicy& policy = {});

}  // namespace sipmlink
