#pragma once

// SiPM front end: microcell dead time and single-photon pulse synthesis.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sipmlink/photon_process.hpp"
#include "sipmlink/random.hpp"

namespace sipmlink {

/// Thrown when a waveform measurement is not well defined.
class MeasurementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniformly sampled voltage trace. Sample i sits at t0 + i / sample_rate.
struct Waveform {
  double sample_rate = 1e9;
  std::vector<double> samples;
  double t0 = 0.0;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  void validate() const;
};

struct SiPMParams {
  std::int64_t n_microcells = 2880;
  double recovery_time = 30e-9;
  /// Single-photon peak at the SiPM pin, before any amplification. This is a
  /// calibration value chosen so that the gain/bandwidth regimes of the
  /// single-pole readout separate around a 1 mV comparator threshold.
  double single_pe_amplitude = 0.232e-3;
  double tau_rise = 1e-9;
  double tau_fall = 10e-9;
  /// Relative standard deviation of per-avalanche amplitude (0 = identical pulses).
  double amplitude_spread = 0.05;

  void validate() const;

  /// Defaults with tau_fall calibrated for an 8 ns FWHM.
  static SiPMParams calibrated();
};

/// Single-photon pulse A * (exp(-t/tau_fall) - exp(-t/tau_rise)) / norm for
/// t >= 0, with norm chosen so the peak equals A.
class PulseTemplate {
 public:
  PulseTemplate(double amplitude, double tau_rise, double tau_fall);
  explicit PulseTemplate(const SiPMParams& p)
      : PulseTemplate(p.single_pe_amplitude, p.tau_rise, p.tau_fall) {}

  double operator()(double t) const;

  double amplitude() const { return amplitude_; }
  double tau_rise() const { return tau_rise_; }
  double tau_fall() const { return tau_fall_; }
  double peak_time() const { return peak_time_; }
  /// Scale applied to the raw double exponential (amplitude / raw peak).
  double scale() const { return scale_; }
  /// Continuous-time full width at half maximum, found by root bracketing.
  double fwhm() const;
  /// Time integral of the pulse (V*s).
  double area() const;

 private:
  double amplitude_;
  double tau_rise_;
  double tau_fall_;
  double peak_time_;
  double scale_;
};

/// tau_fall giving the requested FWHM for a fixed tau_rise, by bisection.
double calibrate_tau_fall(double tau_rise, double target_fwhm, double tolerance = 1e-13);

/// Per-avalanche amplitude dispersion. spread = 0 disables it.
struct AmplitudeJitter {
  double spread = 0.0;
  RngSeed seed{};
};

/// Non-paralyzable per-microcell dead time. Each event lands on a uniformly
/// random cell and is dropped if that cell fired (and was not itself
/// dropped) less than recovery_time earlier.
EventTimes microcell_filter(const EventTimes& events, const SiPMParams& params, RngSeed seed);

/// Minimum sample rate accepted by synthesis for a given rise time.
double min_synthesis_rate(double tau_rise);

/// Streaming pulse synthesizer. The double exponential is carried as two
/// decaying states, so every sample is the exact superposition of all
/// events at or before its timestamp; chunks of any size concatenate to
/// the same samples.
class PulseSynthesizer {
 public:
  PulseSynthesizer(std::span<const double> event_times, const PulseTemplate& shape,
                   double sample_rate, AmplitudeJitter jitter = {});

  /// Fills `out` with the next out.size() samples.
  void generate(std::span<double> out);
  std::size_t next_index() const { return next_index_; }

 private:
  static constexpr std::size_t kNever = static_cast<std::size_t>(-1);
  std::size_t entry_index(double event_time) const;

  std::span<const double> events_;
  std::size_t next_event_ = 0;
  /// Sample index at which events_[next_event_] starts contributing.
  std::size_t pending_index_ = kNever;
  std::size_t next_index_ = 0;
  double sample_rate_;
  double tau_rise_;
  double tau_fall_;
  double scale_;
  double decay_fall_;
  double decay_rise_;
  double state_fall_ = 0.0;
  double state_rise_ = 0.0;
  double spread_;
  Rng rng_;
};

std::size_t sample_count(double duration, double sample_rate);

/// samples[i] = sum over events of shape(t_i - t_event).
Waveform synth_waveform(const EventTimes& events, const PulseTemplate& shape, double sample_rate,
                        double duration, AmplitudeJitter jitter = {});

/// Linearly interpolated width at half of the global maximum.
double measure_fwhm(const Waveform& w);

}  // namespace sipmlink
