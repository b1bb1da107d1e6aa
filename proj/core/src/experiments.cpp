#include "sipmlink/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sipmlink {
namespace {

constexpr std::size_t kContinuousChunk = std::size_t{1} << 20;
// Working block for the sample loops; small enough to stay in cache.
constexpr std::size_t kBlock = std::size_t{1} << 14;

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

AnalogChainConfig seeded_chain(const LinkConfig& cfg) {
  AnalogChainConfig chain = cfg.chain;
  chain.noise.seed = cfg.master_seed;
  return chain;
}

// Synthesizes `total` samples from `events`, runs them through the
// conditioner, and hands each chunk to sink(chunk, first_index).
template <typename Sink>
void stream_waveform(const LinkConfig& cfg, std::span<const double> events, std::size_t total,
                     std::size_t chunk, Sink&& sink) {
  const PulseTemplate shape(cfg.sipm);
  PulseSynthesizer synth(events, shape, cfg.sample_rate,
                         AmplitudeJitter{cfg.sipm.amplitude_spread, cfg.master_seed});
  SignalConditioner conditioner(seeded_chain(cfg), cfg.sample_rate);
  std::vector<double> buffer(std::min({std::max<std::size_t>(chunk, 1), kBlock, total}));
  for (std::size_t done = 0; done < total;) {
    const std::size_t n = std::min(buffer.size(), total - done);
    std::span<double> s(buffer.data(), n);
    synth.generate(s);
    conditioner.process(s);
    sink(std::span<const double>(s), done);
    done += n;
  }
}

EventTimes detected_events(const LinkConfig& cfg, EventTimes signal) {
  Rng dark_rng(cfg.master_seed, StreamId::kDark);
  const auto dark = homogeneous_poisson(cfg.link.dark_count_rate, signal.duration, dark_rng);
  return microcell_filter(merge(signal, dark), cfg.sipm, cfg.master_seed);
}

void check_continuous(const LinkConfig& cfg, double optical_power, double duration) {
  if (!(optical_power >= 0.0) || !std::isfinite(optical_power)) {
    throw std::invalid_argument("optical power must be finite and >= 0");
  }
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
  LinkConfig check = cfg;
  check.mode = SimMode::kFullWaveform;
  check.validate();
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

LinkCounts simulate_counts(const LinkConfig& cfg) {
  cfg.validate();
  const double bit_time = cfg.link.bit_time();
  LinkCounts out;
  out.tx = lfsr_prbs(cfg.prbs, cfg.n_bits, bit_time);

  if (cfg.mode == SimMode::kIdealCounts) {
    const auto budget = budget_for(cfg.link);
    Rng rng(cfg.master_seed, StreamId::kIdealCounts);
    out.counts.bit_time = bit_time;
    out.counts.counts.reserve(cfg.n_bits);
    for (auto b : out.tx.bits) {
      const double mean = (b ? budget.lambda_s : 0.0) + budget.lambda_b;
      out.counts.counts.push_back(static_cast<std::uint32_t>(rng.poisson(mean)));
    }
    return out;
  }

  Rng signal_rng(cfg.master_seed, StreamId::kSignal);
  const double peak_rate =
      detected_rate(cfg.link.peak_power(), cfg.link.wavelength, cfg.link.pde);
  const auto events = detected_events(cfg, ook_signal_events(out.tx, peak_rate, signal_rng));

  const double duration = out.tx.duration();
  const std::size_t total = sample_count(duration, cfg.sample_rate);
  const auto chunk = static_cast<std::size_t>(
      std::max(1.0, std::round(static_cast<double>(cfg.chunk_bits) * bit_time * cfg.sample_rate)));
  HysteresisComparator cmp(cfg.chain.comparator);
  DigitalPulseTrain raw;
  stream_waveform(cfg, events.times, total, chunk, [&](std::span<const double> s, std::size_t first) {
    cmp.process(s, first, 0.0, cfg.sample_rate, raw);
  });
  auto train = min_width_filter(raw, cfg.chain.min_width);
  // Sample times all lie below the record end; this only guards rounding.
  while (!train.rises.empty() && train.rises.back() >= duration) train.rises.pop_back();
  out.counts = interleaved_count(train, bit_time, cfg.n_bits);
  return out;
}

LinkResult simulate_link(const LinkConfig& cfg) {
  const auto sim = simulate_counts(cfg);
  LinkResult r;
  r.budget = budget_for(cfg.link);
  r.theory = optimal_threshold(r.budget);
  for (auto c : sim.counts.counts) r.total_counts += c;
  const int n_t_max = std::max({15, 2 * r.theory.n_t + 5, cfg.n_t.value_or(0)});
  r.bathtub = bathtub(sim.counts, sim.tx, 0, n_t_max);
  const int n_t = cfg.n_t.value_or(r.bathtub.optimum().n_t);
  r.report = ber_measure(sim.tx, decide(sim.counts, n_t));
  r.report.n_t = n_t;
  return r;
}

CsvTable link_report_table(const LinkConfig& cfg, const LinkResult& r) {
  CsvTable t({"mode", "data_rate_bps", "avg_power_w", "avg_power_dbm", "lambda_s", "lambda_b",
              "bits", "errors", "ber", "n_t", "theory_pe", "theory_n_t"});
  t.add_row({to_string(cfg.mode), fmt(cfg.link.data_rate), fmt(cfg.link.avg_optical_power),
             fmt(watts_to_dbm(cfg.link.avg_optical_power)), fmt(r.budget.lambda_s),
             fmt(r.budget.lambda_b), fmt(r.report.n_bits), fmt(r.report.n_errors),
             fmt(r.report.ber), fmt(r.report.n_t), fmt(r.theory.pe), fmt(r.theory.n_t)});
  return t;
}

CsvTable bathtub_table(const Bathtub& b) {
  CsvTable t({"n_t", "bits", "errors", "ber"});
  for (const auto& row : b.rows) {
    t.add_row({fmt(row.n_t), fmt(row.n_bits), fmt(row.n_errors), fmt(row.ber)});
  }
  return t;
}

double DurationPolicy::duration_for(double expected_rate) const {
  if (!(min_duration > 0.0) || !(max_duration >= min_duration)) {
    throw std::invalid_argument("DurationPolicy: need 0 < min_duration <= max_duration");
  }
  if (!(expected_rate > 0.0)) return max_duration;
  return std::clamp(target_counts / expected_rate, min_duration, max_duration);
}

std::vector<DigitalPulseTrain> continuous_light_edges(const LinkConfig& cfg, double optical_power,
                                                      double duration,
                                                      std::span<const ComparatorConfig> comparators) {
  check_continuous(cfg, optical_power, duration);
  Rng signal_rng(cfg.master_seed, StreamId::kSignal);
  const double rate = detected_rate(optical_power, cfg.link.wavelength, cfg.link.pde);
  const auto events = detected_events(cfg, homogeneous_poisson(rate, duration, signal_rng));

  std::vector<HysteresisComparator> cmps;
  cmps.reserve(comparators.size());
  for (const auto& c : comparators) cmps.emplace_back(c);
  std::vector<DigitalPulseTrain> trains(comparators.size());
  stream_waveform(cfg, events.times, sample_count(duration, cfg.sample_rate), kContinuousChunk,
                  [&](std::span<const double> s, std::size_t first) {
                    for (std::size_t k = 0; k < cmps.size(); ++k) {
                      cmps[k].process(s, first, 0.0, cfg.sample_rate, trains[k]);
                    }
                  });
  return trains;
}

CountRate measure_count_rate(const LinkConfig& cfg, double optical_power, double duration) {
  const ComparatorConfig cmp[] = {cfg.chain.comparator};
  const auto trains = continuous_light_edges(cfg, optical_power, duration, cmp);
  CountRate r;
  r.counts = min_width_filter(trains.front(), cfg.chain.min_width).size();
  r.duration = duration;
  r.counts_per_s = static_cast<double>(r.counts) / duration;
  return r;
}

std::vector<DynamicRangeRow> run_dynamic_range(const LinkConfig& cfg,
                                               std::span<const double> power_grid,
                                               const DurationPolicy& policy) {
  if (power_grid.empty()) throw std::invalid_argument("run_dynamic_range: empty power grid");
  std::vector<DynamicRangeRow> rows;
  for (double p : power_grid) {
    DynamicRangeRow row;
    row.avg_power_w = p;
    row.theory_counts_per_s =
        detected_rate(p, cfg.link.wavelength, cfg.link.pde) + cfg.link.dark_count_rate;
    row.counts_per_s =
        measure_count_rate(cfg, p, policy.duration_for(row.theory_counts_per_s)).counts_per_s;
    rows.push_back(row);
  }
  return rows;
}

CsvTable dynamic_range_table(std::span<const DynamicRangeRow> rows) {
  CsvTable t({"avg_power_w", "counts_per_s", "theory_counts_per_s"});
  for (const auto& r : rows) {
    t.add_row({fmt(r.avg_power_w), fmt(r.counts_per_s), fmt(r.theory_counts_per_s)});
  }
  return t;
}

std::vector<ThresholdSweepRow> run_threshold_sweep(const LinkConfig& cfg,
                                                   std::span<const double> v_th_grid,
                                                   HysteresisRule rule, double optical_power,
                                                   double duration) {
  if (v_th_grid.empty()) throw std::invalid_argument("run_threshold_sweep: empty grid");
  if (!std::is_sorted(v_th_grid.begin(), v_th_grid.end())) {
    throw std::invalid_argument("run_threshold_sweep: grid must be sorted ascending");
  }
  std::vector<ComparatorConfig> cmps;
  for (double v : v_th_grid) {
    const double hyst = std::min(rule.hysteresis_for(v), 0.999 * std::abs(v));
    cmps.push_back({v, std::max(0.0, hyst)});
  }
  const auto trains = continuous_light_edges(cfg, optical_power, duration, cmps);
  std::vector<ThresholdSweepRow> rows;
  for (std::size_t k = 0; k < trains.size(); ++k) {
    const auto n = min_width_filter(trains[k], cfg.chain.min_width).size();
    rows.push_back({v_th_grid[k], static_cast<double>(n) / duration});
  }
  return rows;
}

CsvTable threshold_sweep_table(std::span<const ThresholdSweepRow> rows) {
  CsvTable t({"v_th_volts", "counts_per_second"});
  for (const auto& r : rows) t.add_row({fmt(r.v_th), fmt(r.counts_per_second)});
  return t;
}

std::vector<BerRow> run_ber_vs_power(const LinkConfig& cfg, std::span<const double> power_grid,
                                     std::span<const double> data_rates, double collection_time) {
  if (power_grid.empty() || data_rates.empty()) {
    throw std::invalid_argument("run_ber_vs_power: empty grid");
  }
  if (collection_time < 0.0) throw std::invalid_argument("run_ber_vs_power: collection_time < 0");
  std::vector<BerRow> rows;
  for (double rate : data_rates) {
    for (double p : power_grid) {
      LinkConfig point = cfg;
      point.link.data_rate = rate;
      point.link.avg_optical_power = p;
      if (collection_time > 0.0) {
        point.n_bits = static_cast<std::size_t>(std::llround(rate * collection_time));
      }
      const auto r = simulate_link(point);
      rows.push_back({rate, p, r.report.n_bits, r.report.n_errors, r.report.ber, r.report.n_t,
                      r.theory.pe, r.theory.n_t});
    }
  }
  return rows;
}

CsvTable ber_table(std::span<const BerRow> rows) {
  CsvTable t({"data_rate_bps", "avg_power_w", "avg_power_dbm", "bits", "errors", "ber", "n_t",
              "theory_pe", "theory_n_t"});
  for (const auto& r : rows) {
    t.add_row({fmt(r.data_rate), fmt(r.avg_power_w), fmt(watts_to_dbm(r.avg_power_w)),
               fmt(r.n_bits), fmt(r.n_errors), fmt(r.ber), fmt(r.n_t), fmt(r.theory_pe),
               fmt(r.theory_n_t)});
  }
  return t;
}

GbpStudySpec GbpStudySpec::standard() {
  GbpStudySpec s;
  s.configs = {{1, 500e6}, {10, 50e6}, {500, 1e6}, {1, 120e6}, {20, 6e6},
               {120, 1e6}, {1, 80e6},  {40, 2e6},  {80, 1e6}};
  for (int dbm = -100; dbm <= -60; dbm += 2) s.power_grid.push_back(dbm_to_watts(dbm));
  s.data_rates = {1e4, 3e4, 1e5, 3e5, 1e6};
  return s;
}

PulseStatsRow single_pe_statistics(const LinkConfig& cfg, std::size_t n_pulses) {
  if (n_pulses == 0) throw std::invalid_argument("single_pe_statistics: n_pulses must be > 0");
  LinkConfig check = cfg;
  check.mode = SimMode::kFullWaveform;
  check.validate();

  // Far enough apart that each pulse has fully decayed through the filter.
  const double tau_filter = 1.0 / (2.0 * std::numbers::pi * cfg.chain.amp.bandwidth);
  const double spacing = 20.0 * (tau_filter + cfg.sipm.tau_fall) + 100e-9;
  const double fs = cfg.sample_rate;
  const auto window = static_cast<std::size_t>(std::ceil(spacing * fs));
  const double slot = static_cast<double>(window) / fs;

  Rng place(cfg.master_seed, StreamId::kUser);
  std::vector<double> events(n_pulses);
  for (std::size_t k = 0; k < n_pulses; ++k) {
    events[k] = (static_cast<double>(k) + 0.1) * slot + place.uniform() / fs;
  }

  std::vector<double> peaks(n_pulses, -std::numeric_limits<double>::infinity());
  HysteresisComparator cmp(cfg.chain.comparator);
  DigitalPulseTrain raw;
  stream_waveform(cfg, events, window * n_pulses, window,
                  [&](std::span<const double> s, std::size_t first) {
                    for (std::size_t i = 0; i < s.size(); ++i) {
                      double& peak = peaks[(first + i) / window];
                      peak = std::max(peak, s[i]);
                    }
                    cmp.process(s, first, 0.0, fs, raw);
                  });
  const auto train = min_width_filter(raw, cfg.chain.min_width);
  std::vector<bool> counted(n_pulses, false);
  for (double t : train.rises) {
    const auto k = static_cast<std::size_t>(t / slot);
    if (k < n_pulses) counted[k] = true;
  }

  PulseStatsRow row;
  row.amp = cfg.chain.amp;
  row.n_pulses = n_pulses;
  row.peak_mean = mean_of(peaks);
  double ss = 0.0;
  for (double p : peaks) ss += (p - row.peak_mean) * (p - row.peak_mean);
  row.peak_std = n_pulses > 1 ? std::sqrt(ss / static_cast<double>(n_pulses - 1)) : 0.0;
  row.counted_fraction = static_cast<double>(std::count(counted.begin(), counted.end(), true)) /
                         static_cast<double>(n_pulses);
  return row;
}

namespace {

// Peak power at which the measured signal rate reaches `target_rate`, by
// linear interpolation along the ascending power grid; +inf if never reached.
double invert_signal_curve(std::span<const double> powers, std::span<const double> signal_rates,
                           double target_rate) {
  double p_prev = 0.0;
  double s_prev = 0.0;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double s = signal_rates[i];
    if (s >= target_rate) {
      if (s == s_prev) return powers[i];
      return p_prev + (target_rate - s_prev) * (powers[i] - p_prev) / (s - s_prev);
    }
    // Past saturation the count curve can fall again; only rising parts count.
    if (s > s_prev) {
      p_prev = powers[i];
      s_prev = s;
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

GbpStudyResult run_gbp_study(const LinkConfig& base, const GbpStudySpec& spec) {
  if (spec.configs.empty()) throw std::invalid_argument("run_gbp_study: no amplifier configs");
  if (!std::is_sorted(spec.power_grid.begin(), spec.power_grid.end())) {
    throw std::invalid_argument("run_gbp_study: power grid must be sorted ascending");
  }
  if (!(spec.target_pe > 0.0 && spec.target_pe < 0.5)) {
    throw std::invalid_argument("run_gbp_study: target_pe must lie in (0, 0.5)");
  }
  GbpStudyResult out;
  for (const auto& amp : spec.configs) {
    LinkConfig cfg = base;
    cfg.chain.amp = amp;
    out.pulse_stats.push_back(single_pe_statistics(cfg, spec.n_pulses));

    const double dark =
        measure_count_rate(cfg, 0.0, spec.counts_duration.max_duration).counts_per_s;
    std::vector<double> powers;
    std::vector<double> signal;
    for (double p : spec.power_grid) {
      const double theory =
          detected_rate(p, cfg.link.wavelength, cfg.link.pde) + cfg.link.dark_count_rate;
      const double measured =
          p == 0.0 ? dark
                   : measure_count_rate(cfg, p, spec.counts_duration.duration_for(theory)).counts_per_s;
      out.counts.push_back({amp, p, measured, theory});
      powers.push_back(p);
      signal.push_back(std::max(0.0, measured - dark));
    }
    for (double rate : spec.data_rates) {
      const double lb = dark / rate;
      const double ls = required_lambda_s(lb, spec.target_pe);
      const double peak = invert_signal_curve(powers, signal, ls * rate);
      out.required_power.push_back({"simulated", amp, rate, peak * cfg.link.ook_duty});
    }
  }
  for (double rate : spec.data_rates) {
    out.required_power.push_back(
        {"theory", {0.0, 0.0}, rate,
         required_avg_power(base.link.dark_count_rate, rate, spec.target_pe, base.link.pde,
                            base.link.wavelength)});
  }
  return out;
}

CsvTable pulse_stats_table(std::span<const PulseStatsRow> rows) {
  CsvTable t({"gbp_hz", "gain", "bandwidth_hz", "pulses", "peak_mean_v", "peak_std_v",
              "counted_fraction"});
  for (const auto& r : rows) {
    t.add_row({fmt(r.amp.gbp()), fmt(r.amp.gain), fmt(r.amp.bandwidth),
               fmt(static_cast<std::uint64_t>(r.n_pulses)), fmt(r.peak_mean), fmt(r.peak_std),
               fmt(r.counted_fraction)});
  }
  return t;
}

CsvTable gbp_counts_table(std::span<const GbpCountsRow> rows) {
  CsvTable t({"gbp_hz", "gain", "bandwidth_hz", "avg_power_w", "counts_per_s",
              "theory_counts_per_s"});
  for (const auto& r : rows) {
    t.add_row({fmt(r.amp.gbp()), fmt(r.amp.gain), fmt(r.amp.bandwidth), fmt(r.avg_power_w),
               fmt(r.counts_per_s), fmt(r.theory_counts_per_s)});
  }
  return t;
}

CsvTable required_power_table(std::span<const RequiredPowerRow> rows) {
  CsvTable t({"label", "gbp_hz", "gain", "bandwidth_hz", "data_rate_bps", "required_avg_power_w",
              "required_avg_power_dbm"});
  for (const auto& r : rows) {
    const double w = r.required_avg_power_w;
    t.add_row({r.label, fmt(r.amp.gbp()), fmt(r.amp.gain), fmt(r.amp.bandwidth), fmt(r.data_rate),
               fmt(w), fmt(std::isfinite(w) ? watts_to_dbm(w) : w)});
  }
  return t;
}

PowerPenaltyTables run_power_penalty(std::span<const double> lambda_b_grid,
                                     std::span<const double> dark_rates,
                                     std::span<const double> data_rates, double target_pe,
                                     double pde, double wavelength) {
  PowerPenaltyTables out;
  out.outer = power_penalty_curve(lambda_b_grid, target_pe);
  for (double dark : dark_rates) {
    for (double rate : data_rates) {
      PowerPenaltyInsetRow row;
      row.dark_rate = dark;
      row.data_rate = rate;
      row.lambda_b = dark / rate;
      row.lambda_s = required_lambda_s(row.lambda_b, target_pe);
      row.avg_power_w = required_avg_power(dark, rate, target_pe, pde, wavelength);
      out.inset.push_back(row);
    }
  }
  return out;
}

CsvTable power_penalty_table(std::span<const PowerPenaltyRow> rows) {
  CsvTable t({"lambda_b", "lambda_s", "n_t"});
  for (const auto& r : rows) t.add_row({fmt(r.lambda_b), fmt(r.lambda_s), fmt(r.n_t)});
  return t;
}

CsvTable power_penalty_inset_table(std::span<const PowerPenaltyInsetRow> rows) {
  CsvTable t({"dark_rate_cps", "data_rate_bps", "lambda_b", "lambda_s", "avg_power_w",
              "avg_power_dbm"});
  for (const auto& r : rows) {
    t.add_row({fmt(r.dark_rate), fmt(r.data_rate), fmt(r.lambda_b), fmt(r.lambda_s),
               fmt(r.avg_power_w), fmt(watts_to_dbm(r.avg_power_w))});
  }
  return t;
}

SweepVariable parse_sweep_variable(const std::string& text) {
  if (text == "optical_power" || text == "dynamic-range") return SweepVariable::kOpticalPower;
  if (text == "v_th" || text == "vth") return SweepVariable::kVth;
  if (text == "n_t" || text == "bathtub") return SweepVariable::kNt;
  if (text == "data_rate") return SweepVariable::kDataRate;
  if (text == "gbp") return SweepVariable::kGbp;
  throw std::invalid_argument("unknown sweep variable '" + text + "'");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("SweepSpec: grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("SweepSpec: grid must be sorted ascending");
  }
  if (variable == SweepVariable::kNt) {
    for (double v : grid) {
      if (v < 0.0 || v != std::floor(v)) {
        throw std::invalid_argument("SweepSpec: n_t grid must hold non-negative integers");
      }
    }
  }
}

CsvTable run_sweep(const LinkConfig& base, const SweepSpec& spec, const DurationPolicy& policy) {
  spec.validate();
  const LinkConfig cfg = spec.overrides.empty() ? base : parse_link_config(spec.overrides, base);
  switch (spec.variable) {
    case SweepVariable::kOpticalPower:
      return dynamic_range_table(run_dynamic_range(cfg, spec.grid, policy));
    case SweepVariable::kVth: {
      const double p = cfg.link.avg_optical_power;
      const double rate =
          detected_rate(p, cfg.link.wavelength, cfg.link.pde) + cfg.link.dark_count_rate;
      return threshold_sweep_table(
          run_threshold_sweep(cfg, spec.grid, HysteresisRule::fixed(cfg.chain.comparator.hysteresis),
                              p, policy.duration_for(rate)));
    }
    case SweepVariable::kNt: {
      LinkConfig point = cfg;
      point.n_t.reset();
      const auto counts = simulate_counts(point);
      const auto tub = bathtub(counts.counts, counts.tx, static_cast<int>(spec.grid.front()),
                               static_cast<int>(spec.grid.back()));
      Bathtub picked;
      for (const auto& row : tub.rows) {
        if (std::find(spec.grid.begin(), spec.grid.end(), static_cast<double>(row.n_t)) !=
            spec.grid.end()) {
          picked.rows.push_back(row);
        }
      }
      return bathtub_table(picked);
    }
    case SweepVariable::kDataRate: {
      const double p[] = {cfg.link.avg_optical_power};
      return ber_table(run_ber_vs_power(cfg, p, spec.grid));
    }
    case SweepVariable::kGbp: {
      std::vector<PulseStatsRow> rows;
      for (double gbp : spec.grid) {
        LinkConfig point = cfg;
        point.chain.amp = AmplifierConfig::from_gbp(gbp, cfg.chain.amp.gain);
        rows.push_back(single_pe_statistics(point, 1000));
      }
      return pulse_stats_table(rows);
    }
  }
  throw std::logic_error("run_sweep: unhandled variable");
}

}  // namespace sipmlink
