#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sipmlink/random.hpp"

namespace sipmlink {

/// Sorted detection timestamps in seconds, all inside [0, duration).
struct EventTimes {
  std::vector<double> times;
  double duration = 0.0;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Transmitted OOK bits with their common bit period.
struct BitStream {
  std::vector<std::uint8_t> bits;
  double bit_time = 0.0;

  std::size_t size() const { return bits.size(); }
  double duration() const { return static_cast<double>(bits.size()) * bit_time; }
  void validate() const;
};

/// Homogeneous Poisson arrivals at `rate` over [0, duration).
EventTimes homogeneous_poisson(double rate, double duration, Rng& rng);
EventTimes homogeneous_poisson(double rate, double duration, RngSeed seed);

/// Detected signal events for OOK: rate `detected_rate_peak` inside 1-bits,
/// zero inside 0-bits.
EventTimes ook_signal_events(const BitStream& bits, double detected_rate_peak, Rng& rng);
EventTimes ook_signal_events(const BitStream& bits, double detected_rate_peak, RngSeed seed);

/// Sorted union of two event lists over the same duration.
EventTimes merge(const EventTimes& a, const EventTimes& b);

}  // namespace sipmlink
