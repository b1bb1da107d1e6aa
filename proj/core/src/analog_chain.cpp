#include "sipmlink/analog_chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sipmlink {
namespace {

void check_cutoff(double cutoff, double sample_rate, const char* who) {
  if (!(cutoff > 0.0) || !(cutoff < 0.5 * sample_rate)) {
    throw std::invalid_argument(std::string(who) + ": cutoff must lie in (0, sample_rate/2)");
  }
}

}  // namespace

AmplifierConfig AmplifierConfig::from_gbp(double gbp, double gain) {
  if (!(gbp > 0.0) || !(gain > 0.0)) {
    throw std::invalid_argument("AmplifierConfig: gbp and gain must be > 0");
  }
  return {gain, gbp / gain};
}

void AmplifierConfig::validate(double sample_rate) const {
  if (!(gain > 0.0)) throw std::invalid_argument("AmplifierConfig: gain must be > 0");
  check_cutoff(bandwidth, sample_rate, "AmplifierConfig");
}

double NoiseConfig::sigma(double bandwidth, double gain) const {
  if (!(input_psd >= 0.0)) throw std::invalid_argument("NoiseConfig: input_psd must be >= 0");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("add_noise: bandwidth must be > 0");
  return input_psd * std::sqrt(bandwidth) * gain;
}

void ComparatorConfig::validate() const {
  if (!(hysteresis >= 0.0) || !(v_th > hysteresis)) {
    throw std::invalid_argument("ComparatorConfig: need v_th > hysteresis >= 0");
  }
}

void DigitalPulseTrain::check_alternation() const {
  if (!(rises.size() == falls.size() || rises.size() == falls.size() + 1)) {
    throw std::logic_error("DigitalPulseTrain: rise/fall counts do not alternate");
  }
  for (std::size_t i = 0; i < falls.size(); ++i) {
    if (!(falls[i] > rises[i])) throw std::logic_error("DigitalPulseTrain: fall before its rise");
    if (i + 1 < rises.size() && !(rises[i + 1] > falls[i])) {
      throw std::logic_error("DigitalPulseTrain: rise before previous fall");
    }
  }
}

OnePoleLowPass::OnePoleLowPass(double cutoff, double sample_rate) {
  check_cutoff(cutoff, sample_rate, "first_order_lpf");
  retain_ = std::exp(-2.0 * std::numbers::pi * cutoff / sample_rate);
  alpha_ = 1.0 - retain_;
}

void OnePoleLowPass::process(std::span<double> samples, double input_gain) {
  double y = state_;
  for (double& x : samples) {
    // y + alpha * (x - y), regrouped to shorten the dependency chain.
    y = retain_ * y + alpha_ * (input_gain * x);
    x = y;
  }
  state_ = y;
}

void OnePoleHighPass::process(std::span<double> samples) {
  const double alpha = low_.alpha();
  const double retain = low_.retain();
  double y = low_.state();
  for (double& x : samples) {
    y = retain * y + alpha * x;
    x -= y;
  }
  low_.set_state(y);
}

HysteresisComparator::HysteresisComparator(ComparatorConfig cfg)
    : upper_(cfg.v_th), lower_(cfg.lower()) {
  cfg.validate();
}

void HysteresisComparator::process(std::span<const double> samples, std::size_t first_index,
                                   double t0, double sample_rate, DigitalPulseTrain& out) {
  auto stamp = [&](std::size_t i) {
    return t0 + static_cast<double>(first_index + i) / sample_rate;
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = samples[i];
    if (!high_) {
      if (v > upper_) {
        high_ = true;
        out.rises.push_back(stamp(i));
      }
    } else if (v < lower_) {
      high_ = false;
      out.falls.push_back(stamp(i));
    }
  }
}

Waveform first_order_lpf(const Waveform& w, double cutoff) {
  OnePoleLowPass lpf(cutoff, w.sample_rate);
  Waveform out = w;
  lpf.process(out.samples);
  return out;
}

Waveform apply_gain(const Waveform& w, double gain) {
  if (!(gain > 0.0)) throw std::invalid_argument("apply_gain: gain must be > 0");
  Waveform out = w;
  for (double& v : out.samples) v *= gain;
  return out;
}

Waveform add_noise(const Waveform& w, const NoiseConfig& cfg, double effective_bandwidth,
                   double gain) {
  const double sigma = cfg.sigma(effective_bandwidth, gain);
  Waveform out = w;
  if (sigma == 0.0) return out;
  Rng rng(cfg.seed, StreamId::kNoise);
  rng.add_normal(out.samples, sigma);
  return out;
}

Waveform gbp_chain(const Waveform& w, const AmplifierConfig& amp, const NoiseConfig& noise) {
  amp.validate(w.sample_rate);
  Waveform out = first_order_lpf(apply_gain(w, amp.gain), amp.bandwidth);
  return add_noise(out, noise, amp.bandwidth, amp.gain);
}

DigitalPulseTrain comparator(const Waveform& w, const ComparatorConfig& cfg) {
  HysteresisComparator cmp(cfg);
  DigitalPulseTrain out;
  cmp.process(w.samples, 0, w.t0, w.sample_rate, out);
  return out;
}

DigitalPulseTrain min_width_filter(const DigitalPulseTrain& train, double min_width) {
  if (!(min_width >= 0.0)) throw std::invalid_argument("min_width_filter: min_width must be >= 0");
  DigitalPulseTrain out;
  out.rises.reserve(train.rises.size());
  out.falls.reserve(train.falls.size());
  for (std::size_t i = 0; i < train.rises.size(); ++i) {
    if (i < train.falls.size()) {
      if (train.falls[i] - train.rises[i] < min_width) continue;
      out.rises.push_back(train.rises[i]);
      out.falls.push_back(train.falls[i]);
    } else {
      // Still high at the end of the record; its width is unknown, keep it.
      out.rises.push_back(train.rises[i]);
    }
  }
  return out;
}

Waveform dc_block(const Waveform& w, double cutoff) {
  OnePoleHighPass hpf(cutoff, w.sample_rate);
  Waveform out = w;
  hpf.process(out.samples);
  return out;
}

double HysteresisRule::hysteresis_for(double v_th) const {
  return kind == Kind::kFixed ? value : value * v_th;
}

std::vector<ThresholdSweepRow> threshold_sweep(const Waveform& w, std::span<const double> v_th_grid,
                                               HysteresisRule rule, double min_width) {
  if (!std::is_sorted(v_th_grid.begin(), v_th_grid.end())) {
    throw std::invalid_argument("threshold_sweep: grid must be sorted ascending");
  }
  const double duration = w.duration();
  std::vector<ThresholdSweepRow> rows;
  rows.reserve(v_th_grid.size());
  for (double v_th : v_th_grid) {
    // Keep the lower threshold below v_th even when the rule asks for more.
    const double hyst = std::min(rule.hysteresis_for(v_th), 0.999 * std::abs(v_th));
    ComparatorConfig cfg{v_th, std::max(0.0, hyst)};
    const auto train = min_width_filter(comparator(w, cfg), min_width);
    rows.push_back({v_th, static_cast<double>(train.size()) / duration});
  }
  return rows;
}

SignalConditioner::SignalConditioner(const AnalogChainConfig& cfg, double sample_rate)
    : gain_(cfg.amp.gain),
      sigma_(cfg.noise.sigma(cfg.amp.bandwidth, cfg.amp.gain)),
      lowpass_(cfg.amp.bandwidth, sample_rate),
      noise_rng_(cfg.noise.seed, StreamId::kNoise) {
  cfg.amp.validate(sample_rate);
  if (cfg.ac_coupled) highpass_.emplace(cfg.highpass_cutoff, sample_rate);
}

void SignalConditioner::process(std::span<double> chunk) {
  lowpass_.process(chunk, gain_);
  if (highpass_) highpass_->process(chunk);
  if (sigma_ > 0.0) noise_rng_.add_normal(chunk, sigma_);
}

AnalogChain::AnalogChain(const AnalogChainConfig& cfg, double sample_rate, double t0)
    : min_width_(cfg.min_width),
      sample_rate_(sample_rate),
      t0_(t0),
      conditioner_(cfg, sample_rate),
      comparator_(cfg.comparator) {
  if (!(min_width_ >= 0.0)) throw std::invalid_argument("AnalogChain: min_width must be >= 0");
}

void AnalogChain::process(std::span<double> chunk) {
  conditioner_.process(chunk);
  comparator_.process(chunk, next_index_, t0_, sample_rate_, raw_);
  next_index_ += chunk.size();
}

DigitalPulseTrain AnalogChain::finish() const { return min_width_filter(raw_, min_width_); }

}  // namespace sipmlink
