#pragma once

// Post-SiPM analog path: gain, single-pole bandwidth limit, additive noise,
// optional AC coupling, hysteresis comparator and digital minimum pulse width.

#include <optional>
#include <span>
#include <vector>

#include "sipmlink/random.hpp"
#include "sipmlink/sipm_frontend.hpp"

namespace sipmlink {

/// Lowest usable comparator threshold (typical input offset of commercial parts).
inline constexpr double kMinComparatorThreshold = 1e-3;
/// Narrowest digital pulse the FPGA interface registers.
inline constexpr double kDefaultMinPulseWidth = 5e-9;

/// Single-pole amplifier stage.
struct AmplifierConfig {
  double gain = 1.0;
  double bandwidth = 500e6;  // -3 dB, Hz

  double gbp() const { return gain * bandwidth; }
  /// Stage with the given gain whose bandwidth is gbp / gain.
  static AmplifierConfig from_gbp(double gbp, double gain);
  void validate(double sample_rate) const;
};

/// White input-referred voltage noise.
struct NoiseConfig {
  /// Calibration value: 5 uV rms at gain 1 over 500 MHz.
  double input_psd = 2.2360679774997896e-10;  // V/sqrt(Hz)
  RngSeed seed{};

  /// Output rms after `gain` over a noise bandwidth of `bandwidth`.
  double sigma(double bandwidth, double gain = 1.0) const;
};

/// Hysteresis comparator: rises above v_th, falls below v_th - hysteresis.
struct ComparatorConfig {
  double v_th = 18e-3;
  double hysteresis = 5e-3;

  double lower() const { return v_th - hysteresis; }
  void validate() const;
};

/// Rising/falling edge times. A final rise may be unmatched when the input
/// ends while the comparator is high.
struct DigitalPulseTrain {
  std::vector<double> rises;
  std::vector<double> falls;

  std::size_t size() const { return rises.size(); }
  /// Throws std::logic_error if edges do not alternate rise, fall, rise, ...
  void check_alternation() const;
};

class OnePoleLowPass {
 public:
  OnePoleLowPass(double cutoff, double sample_rate);
  /// Filters input_gain * samples in place.
  void process(std::span<double> samples, double input_gain = 1.0);
  double alpha() const { return alpha_; }
  /// exp(-2 pi cutoff / sample_rate) = 1 - alpha.
  double retain() const { return retain_; }
  double state() const { return state_; }
  void set_state(double y) { state_ = y; }

 private:
  double alpha_;
  double retain_;
  double state_ = 0.0;
};

class OnePoleHighPass {
 public:
  OnePoleHighPass(double cutoff, double sample_rate) : low_(cutoff, sample_rate) {}
  void process(std::span<double> samples);

 private:
  OnePoleLowPass low_;
};

class HysteresisComparator {
 public:
  explicit HysteresisComparator(ComparatorConfig cfg);

  /// Consumes samples with global indices first_index, first_index+1, ...;
  /// sample k is stamped t0 + k / sample_rate.
  void process(std::span<const double> samples, std::size_t first_index, double t0,
               double sample_rate, DigitalPulseTrain& out);
  bool high() const { return high_; }

 private:
  double upper_;
  double lower_;
  bool high_ = false;
};

Waveform first_order_lpf(const Waveform& w, double cutoff);
Waveform apply_gain(const Waveform& w, double gain);
/// Adds N(0, sigma) per sample with sigma = psd * sqrt(effective_bandwidth) * gain.
Waveform add_noise(const Waveform& w, const NoiseConfig& cfg, double effective_bandwidth,
                   double gain = 1.0);
/// gain -> first_order_lpf(bandwidth) -> add_noise at the post-gain, post-filter level.
Waveform gbp_chain(const Waveform& w, const AmplifierConfig& amp, const NoiseConfig& noise);
DigitalPulseTrain comparator(const Waveform& w, const ComparatorConfig& cfg);
DigitalPulseTrain min_width_filter(const DigitalPulseTrain& train, double min_width);
/// First-order high-pass: x - first_order_lpf(x).
Waveform dc_block(const Waveform& w, double cutoff);

/// How the lower comparator threshold follows v_th in a sweep.
struct HysteresisRule {
  enum class Kind { kFixed, kFraction };
  Kind kind = Kind::kFixed;
  double value = 5e-3;

  static HysteresisRule fixed(double volts) { return {Kind::kFixed, volts}; }
  static HysteresisRule fraction(double f) { return {Kind::kFraction, f}; }
  double hysteresis_for(double v_th) const;
};

struct ThresholdSweepRow {
  double v_th = 0.0;
  double counts_per_second = 0.0;
};

std::vector<ThresholdSweepRow> threshold_sweep(const Waveform& w, std::span<const double> v_th_grid,
                                               HysteresisRule rule,
                                               double min_width = kDefaultMinPulseWidth);

struct AnalogChainConfig {
  AmplifierConfig amp;
  NoiseConfig noise;
  ComparatorConfig comparator;
  bool ac_coupled = false;
  double highpass_cutoff = 100e3;
  double min_width = kDefaultMinPulseWidth;
};

/// Streaming analog front end up to the comparator input:
/// gain -> low-pass -> optional AC coupling -> noise. Chunks of any size give
/// the same samples as one pass over the whole record.
class SignalConditioner {
 public:
  SignalConditioner(const AnalogChainConfig& cfg, double sample_rate);
  void process(std::span<double> chunk);
  double noise_sigma() const { return sigma_; }

 private:
  double gain_;
  double sigma_;
  OnePoleLowPass lowpass_;
  std::optional<OnePoleHighPass> highpass_;
  Rng noise_rng_;
};

/// The full analog path including comparator, as one streaming stage.
class AnalogChain {
 public:
  AnalogChain(const AnalogChainConfig& cfg, double sample_rate, double t0 = 0.0);

  /// Processes the next chunk in place (the chunk ends up holding the
  /// comparator input).
  void process(std::span<double> chunk);
  /// Edges so far, after the minimum-width filter.
  DigitalPulseTrain finish() const;
  const DigitalPulseTrain& raw_edges() const { return raw_; }

 private:
  double min_width_;
  double sample_rate_;
  double t0_;
  std::size_t next_index_ = 0;
  SignalConditioner conditioner_;
  HysteresisComparator comparator_;
  DigitalPulseTrain raw_;
};

}  // namespace sipmlink
