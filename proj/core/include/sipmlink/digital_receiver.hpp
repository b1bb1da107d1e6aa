#pragma once

// FPGA-side receiver logic: PRBS source, clockless interleaved pulse
// counters, integer-threshold decisions and BER accounting.

#include <cstdint>
#include <span>
#include <vector>

#include "sipmlink/analog_chain.hpp"
#include "sipmlink/photon_process.hpp"

namespace sipmlink {

/// Fibonacci LFSR. Taps are 1-based stage numbers, as in the polynomial
/// x^15 + x^14 + 1 -> {15, 14}.
struct LfsrConfig {
  int width = 15;
  std::vector<int> taps{15, 14};
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per-bit pulse counts.
struct BitWindowCounts {
  std::vector<std::uint32_t> counts;
  double bit_time = 0.0;

  std::size_t size() const { return counts.size(); }
};

struct BerReport {
  std::uint64_t n_bits = 0;
  std::uint64_t n_errors = 0;
  double ber = 0.0;
  int n_t = 0;
};

struct BathtubRow {
  int n_t = 0;
  std::uint64_t n_bits = 0;
  std::uint64_t n_errors = 0;
  double ber = 0.0;
};

struct Bathtub {
  std::vector<BathtubRow> rows;
  /// Index into rows of the lowest BER (first one on ties).
  std::size_t best = 0;

  const BathtubRow& optimum() const { return rows.at(best); }
};

/// Streaming Fibonacci LFSR. Each step emits the low stage and shifts in the
/// XOR of the tapped stages at the top.
class Lfsr {
 public:
  explicit Lfsr(const LfsrConfig& cfg);
  std::uint8_t next();

 private:
  int width_;
  std::uint64_t tap_mask_;
  std::uint64_t state_;
};

BitStream lfsr_prbs(const LfsrConfig& cfg, std::size_t n_bits, double bit_time = 1e-6);

/// Two counters alternate bit by bit: the active one counts rising edges,
/// and at each bit boundary it is latched into the result and reset while
/// the other takes over. An edge exactly on a boundary belongs to the later bit.
BitWindowCounts interleaved_count(const DigitalPulseTrain& train, double bit_time,
                                  std::size_t n_bits);

/// bit = 1 iff count > n_t.
BitStream decide(const BitWindowCounts& counts, int n_t);

BerReport ber_measure(const BitStream& tx, const BitStream& rx);

/// BER for every threshold in [n_t_min, n_t_max].
Bathtub bathtub(const BitWindowCounts& counts, const BitStream& tx, int n_t_min = 0,
                int n_t_max = 15);

}  // namespace sipmlink
