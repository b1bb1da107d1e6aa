#include "sipmlink/sipm_frontend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace sipmlink {
namespace {

double raw_shape(double t, double tau_rise, double tau_fall) {
  return std::exp(-t / tau_fall) - std::exp(-t / tau_rise);
}

template <typename F>
double bisect_root(F f, double lo, double hi, int iterations = 200) {
  double f_lo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void Waveform::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("Waveform: sample_rate must be > 0");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("Waveform: non-finite sample");
  }
}

void SiPMParams::validate() const {
  if (n_microcells < 1) throw std::invalid_argument("SiPMParams: n_microcells must be >= 1");
  if (!(recovery_time > 0.0)) throw std::invalid_argument("SiPMParams: recovery_time must be > 0");
  if (!(tau_rise > 0.0) || !(tau_fall > tau_rise)) {
    throw std::invalid_argument("SiPMParams: need tau_fall > tau_rise > 0");
  }
  if (!(single_pe_amplitude >= 0.0)) {
    throw std::invalid_argument("SiPMParams: single_pe_amplitude must be >= 0");
  }
  if (!(amplitude_spread >= 0.0)) {
    throw std::invalid_argument("SiPMParams: amplitude_spread must be >= 0");
  }
}

SiPMParams SiPMParams::calibrated() {
  SiPMParams p;
  p.tau_fall = calibrate_tau_fall(p.tau_rise, 8e-9);
  return p;
}

PulseTemplate::PulseTemplate(double amplitude, double tau_rise, double tau_fall)
    : amplitude_(amplitude), tau_rise_(tau_rise), tau_fall_(tau_fall) {
  if (!(tau_rise > 0.0) || !(tau_fall > tau_rise)) {
    throw std::invalid_argument("PulseTemplate: need tau_fall > tau_rise > 0");
  }
  peak_time_ = std::log(tau_fall / tau_rise) * tau_rise * tau_fall / (tau_fall - tau_rise);
  scale_ = amplitude / raw_shape(peak_time_, tau_rise, tau_fall);
}

double PulseTemplate::operator()(double t) const {
  if (t < 0.0) return 0.0;
  return scale_ * raw_shape(t, tau_rise_, tau_fall_);
}

double PulseTemplate::fwhm() const {
  const double half = 0.5 * raw_shape(peak_time_, tau_rise_, tau_fall_);
  auto f = [&](double t) { return raw_shape(t, tau_rise_, tau_fall_) - half; };
  const double left = bisect_root(f, 0.0, peak_time_);
  const double right = bisect_root(f, peak_time_, peak_time_ + 60.0 * tau_fall_);
  return right - left;
}

double PulseTemplate::area() const { return scale_ * (tau_fall_ - tau_rise_); }

double calibrate_tau_fall(double tau_rise, double target_fwhm, double tolerance) {
  if (!(tau_rise > 0.0) || !(target_fwhm > 0.0)) {
    throw std::invalid_argument("calibrate_tau_fall: tau_rise and target must be > 0");
  }
  double lo = tau_rise * (1.0 + 1e-6);
  double hi = 10.0 * target_fwhm;
  if (PulseTemplate(1.0, tau_rise, lo).fwhm() > target_fwhm) {
    throw std::invalid_argument("calibrate_tau_fall: target FWHM too short for this rise time");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (PulseTemplate(1.0, tau_rise, mid).fwhm() < target_fwhm) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

EventTimes microcell_filter(const EventTimes& events, const SiPMParams& params, RngSeed seed) {
  params.validate();
  Rng rng(seed, StreamId::kMicrocell);
  EventTimes out;
  out.duration = events.duration;
  out.times.reserve(events.size());

  const auto n = static_cast<std::uint64_t>(params.n_microcells);
  const double never = -std::numeric_limits<double>::infinity();
  auto fire = [&](double t, double& last) {
    if (t - last >= params.recovery_time) {
      last = t;
      out.times.push_back(t);
    }
  };
  if (n <= (std::uint64_t{1} << 22)) {
    std::vector<double> last_fire(n, never);
    for (double t : events.times) fire(t, last_fire[rng.uniform_index(n)]);
  } else {
    std::unordered_map<std::uint64_t, double> last_fire;
    for (double t : events.times) {
      auto [it, inserted] = last_fire.try_emplace(rng.uniform_index(n), never);
      fire(t, it->second);
    }
  }
  return out;
}

double min_synthesis_rate(double tau_rise) { return 1.0 / tau_rise; }

PulseSynthesizer::PulseSynthesizer(std::span<const double> event_times,
                                   const PulseTemplate& shape, double sample_rate,
                                   AmplitudeJitter jitter)
    : events_(event_times),
      sample_rate_(sample_rate),
      tau_rise_(shape.tau_rise()),
      tau_fall_(shape.tau_fall()),
      scale_(shape.scale()),
      decay_fall_(std::exp(-1.0 / (sample_rate * shape.tau_fall()))),
      decay_rise_(std::exp(-1.0 / (sample_rate * shape.tau_rise()))),
      spread_(jitter.spread),
      rng_(jitter.seed, StreamId::kAmplitude) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("PulseSynthesizer: sample_rate must be > 0");
  if (sample_rate * shape.tau_rise() < 1.0 - 1e-9) {
    throw std::invalid_argument(
        "synth_waveform: sample rate below one sample per rise time constant");
  }
  if (!std::is_sorted(events_.begin(), events_.end())) {
    throw std::invalid_argument("PulseSynthesizer: event times must be sorted");
  }
  pending_index_ = events_.empty() ? kNever : entry_index(events_.front());
}

namespace {
constexpr double kFlushBelow = 1e-200;
}  // namespace

std::size_t PulseSynthesizer::entry_index(double event_time) const {
  // Smallest i with i / sample_rate >= event_time, using the same expression
  // as the sample timestamps.
  auto time_of = [&](std::size_t i) { return static_cast<double>(i) / sample_rate_; };
  auto i = static_cast<std::size_t>(std::max(0.0, std::ceil(event_time * sample_rate_)));
  while (i > 0 && time_of(i - 1) >= event_time) --i;
  while (time_of(i) < event_time) ++i;
  return i;
}

void PulseSynthesizer::generate(std::span<double> out) {
  const std::size_t n_events = events_.size();
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (state_fall_ == 0.0 && state_rise_ == 0.0 && next_index_ < pending_index_) {
      // Idle until the next event: the output is exactly zero.
      const std::size_t idle = std::min(out.size() - j, pending_index_ - next_index_);
      std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(j), idle, 0.0);
      next_index_ += idle;
      j += idle - 1;
      continue;
    }
    double& y = out[j];
    state_fall_ *= decay_fall_;
    state_rise_ *= decay_rise_;
    // A decaying subnormal can round to itself forever; flush it to zero.
    if (state_fall_ < kFlushBelow) state_fall_ = 0.0;
    if (state_rise_ < kFlushBelow) state_rise_ = 0.0;
    if (next_index_ == pending_index_) {
      const double t = static_cast<double>(next_index_) / sample_rate_;
      while (next_event_ < n_events && events_[next_event_] <= t) {
        const double age = t - events_[next_event_];
        double a = 1.0;
        if (spread_ > 0.0) a = std::max(0.0, 1.0 + spread_ * rng_.normal());
        state_fall_ += a * std::exp(-age / tau_fall_);
        state_rise_ += a * std::exp(-age / tau_rise_);
        ++next_event_;
      }
      pending_index_ = next_event_ < n_events ? entry_index(events_[next_event_]) : kNever;
    }
    y = scale_ * (state_fall_ - state_rise_);
    ++next_index_;
  }
}

std::size_t sample_count(double duration, double sample_rate) {
  const double n = duration * sample_rate;
  return static_cast<std::size_t>(std::ceil(n - 1e-6));
}

Waveform synth_waveform(const EventTimes& events, const PulseTemplate& shape, double sample_rate,
                        double duration, AmplitudeJitter jitter) {
  if (!(duration > 0.0)) throw std::invalid_argument("synth_waveform: duration must be > 0");
  PulseSynthesizer synth(events.times, shape, sample_rate, jitter);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(sample_count(duration, sample_rate), 0.0);
  synth.generate(w.samples);
  return w;
}

double measure_fwhm(const Waveform& w) {
  if (w.samples.size() < 3) throw MeasurementError("measure_fwhm: waveform too short");
  const auto max_it = std::max_element(w.samples.begin(), w.samples.end());
  const double peak = *max_it;
  const double floor = *std::min_element(w.samples.begin(), w.samples.end());
  if (!(peak > 0.0) || peak == floor) throw MeasurementError("measure_fwhm: flat waveform");
  const double half = 0.5 * peak;

  std::size_t regions = 0;
  bool above = false;
  for (double v : w.samples) {
    const bool now = v >= half;
    if (now && !above) ++regions;
    above = now;
  }
  if (regions != 1) throw MeasurementError("measure_fwhm: waveform is not single-peaked");

  const auto peak_idx = static_cast<std::size_t>(max_it - w.samples.begin());
  std::size_t left = peak_idx;
  while (left > 0 && w.samples[left - 1] >= half) --left;
  std::size_t right = peak_idx;
  while (right + 1 < w.samples.size() && w.samples[right + 1] >= half) ++right;
  if (left == 0 || right + 1 == w.samples.size()) {
    throw MeasurementError("measure_fwhm: pulse touches the waveform edge");
  }
  auto crossing = [&](std::size_t below, std::size_t at) {
    const double a = w.samples[below];
    const double b = w.samples[at];
    const double frac = (half - a) / (b - a);
    return static_cast<double>(below) + frac * (static_cast<double>(at) - static_cast<double>(below));
  };
  const double t_left = crossing(left - 1, left);
  const double t_right = crossing(right + 1, right);
  return (t_right - t_left) / w.sample_rate;
}

}  // namespace sipmlink
