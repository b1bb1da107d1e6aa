#include "sipmlink/photon_process.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace sipmlink {
namespace {

// Appends Poisson arrivals in [start, end) to `out`.
void append_arrivals(double rate, double start, double end, Rng& rng, std::vector<double>& out) {
  double t = start + rng.exponential(rate);
  while (t < end) {
    out.push_back(t);
    t += rng.exponential(rate);
  }
}

}  // namespace

void BitStream::validate() const {
  if (bits.empty()) throw std::invalid_argument("BitStream: no bits");
  if (!(bit_time > 0.0) || !std::isfinite(bit_time)) {
    throw std::invalid_argument("BitStream: bit_time must be > 0");
  }
}

EventTimes homogeneous_poisson(double rate, double duration, Rng& rng) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("homogeneous_poisson: rate must be finite and >= 0");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("homogeneous_poisson: duration must be > 0");
  }
  EventTimes out;
  out.duration = duration;
  if (rate == 0.0) return out;
  out.times.reserve(static_cast<std::size_t>(rate * duration * 1.05 + 16.0));
  append_arrivals(rate, 0.0, duration, rng, out.times);
  return out;
}

EventTimes homogeneous_poisson(double rate, double duration, RngSeed seed) {
  Rng rng(seed, StreamId::kUser);
  return homogeneous_poisson(rate, duration, rng);
}

EventTimes ook_signal_events(const BitStream& bits, double detected_rate_peak, Rng& rng) {
  bits.validate();
  if (!(detected_rate_peak >= 0.0) || !std::isfinite(detected_rate_peak)) {
    throw std::invalid_argument("ook_signal_events: rate must be finite and >= 0");
  }
  EventTimes out;
  out.duration = bits.duration();
  if (detected_rate_peak == 0.0) return out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits.bits[i] == 0) continue;
    const double start = static_cast<double>(i) * bits.bit_time;
    const double end = std::min(static_cast<double>(i + 1) * bits.bit_time, out.duration);
    append_arrivals(detected_rate_peak, start, end, rng, out.times);
  }
  return out;
}

EventTimes ook_signal_events(const BitStream& bits, double detected_rate_peak, RngSeed seed) {
  Rng rng(seed, StreamId::kSignal);
  return ook_signal_events(bits, detected_rate_peak, rng);
}

EventTimes merge(const EventTimes& a, const EventTimes& b) {
  EventTimes out;
  out.duration = std::max(a.duration, b.duration);
  out.times.reserve(a.size() + b.size());
  std::merge(a.times.begin(), a.times.end(), b.times.begin(), b.times.end(),
             std::back_inserter(out.times));
  return out;
}

}  // namespace sipmlink
