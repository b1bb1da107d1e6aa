#pragma once

#include <cstdint>
#include <span>

#include <boost/random/mersenne_twister.hpp>

namespace sipmlink {

/// Master seed for a simulation. Identical seeds reproduce identical streams.
struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(RngSeed, RngSeed) = default;
};

/// Named sub-streams derived from one master seed. Each stage of the
/// pipeline draws from its own stream so that adding events to one stage
/// never shifts the random sequence seen by another.
enum class StreamId : std::uint32_t {
  kSignal = 1,
  kDark = 2,
  kMicrocell = 3,
  kAmplitude = 4,
  kNoise = 5,
  kIdealCounts = 6,
  kPrbs = 7,
  kUser = 1000,
};

/// Seedable random source.
///
/// Engine: MT19937-64 seeded through std::seed_seq{lo32(seed), hi32(seed),
/// stream}; its output matches std::mt19937_64 seeded the same way. The
/// distributions come from Boost.Random (ziggurat normal and exponential,
/// PTRD Poisson), so a stream is bit-exact across standard libraries for a
/// given Boost release.
class Rng {
 public:
  explicit Rng(RngSeed seed, std::uint32_t stream = 0);
  Rng(RngSeed seed, StreamId stream) : Rng(seed, static_cast<std::uint32_t>(stream)) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  /// Exponential variate with the given rate (1/mean).
  double exponential(double rate);
  /// Standard normal variate.
  double normal();
  /// Poisson variate with the given mean.
  std::uint64_t poisson(double mean);

  /// Adds sigma * N(0,1) to every element, in order.
  void add_normal(std::span<double> out, double sigma);

  boost::random::mt19937_64& engine() { return engine_; }

 private:
  boost::random::mt19937_64 engine_;
};

}  // namespace sipmlink
