#include "sipmlink/digital_receiver.hpp"

#include <bit>
#include <stdexcept>

namespace sipmlink {

void LfsrConfig::validate() const {
  if (width < 2 || width > 63) throw std::invalid_argument("LfsrConfig: width must be in [2, 63]");
  if (taps.empty()) throw std::invalid_argument("LfsrConfig: no taps");
  for (int t : taps) {
    if (t < 1 || t > width) throw std::invalid_argument("LfsrConfig: tap outside [1, width]");
  }
  if (seed == 0) throw std::invalid_argument("LfsrConfig: seed must be non-zero");
  if (seed >> width) throw std::invalid_argument("LfsrConfig: seed wider than the register");
}

Lfsr::Lfsr(const LfsrConfig& cfg) : width_(cfg.width), tap_mask_(0), state_(cfg.seed) {
  cfg.validate();
  // Stage k of the polynomial feeds back from bit (width - k) of the state.
  for (int t : cfg.taps) tap_mask_ |= std::uint64_t{1} << (width_ - t);
}

std::uint8_t Lfsr::next() {
  const auto out = static_cast<std::uint8_t>(state_ & 1u);
  const auto feedback = static_cast<std::uint64_t>(std::popcount(state_ & tap_mask_) & 1);
  state_ = (state_ >> 1) | (feedback << (width_ - 1));
  return out;
}

BitStream lfsr_prbs(const LfsrConfig& cfg, std::size_t n_bits, double bit_time) {
  Lfsr lfsr(cfg);
  BitStream out;
  out.bit_time = bit_time;
  out.bits.resize(n_bits);
  for (auto& b : out.bits) b = lfsr.next();
  return out;
}

BitWindowCounts interleaved_count(const DigitalPulseTrain& train, double bit_time,
                                  std::size_t n_bits) {
  if (!(bit_time > 0.0)) throw std::invalid_argument("interleaved_count: bit_time must be > 0");
  const double end = static_cast<double>(n_bits) * bit_time;

  BitWindowCounts out;
  out.bit_time = bit_time;
  out.counts.assign(n_bits, 0);

  std::uint32_t counter[2] = {0, 0};
  int active = 0;
  std::size_t bit = 0;
  double boundary = bit_time;
  auto swap_roles = [&] {
    out.counts[bit] = counter[active];
    counter[active] = 0;
    active ^= 1;
    ++bit;
    boundary = static_cast<double>(bit + 1) * bit_time;
  };

  double previous = -1.0;
  for (double t : train.rises) {
    if (t < 0.0 || t >= end) {
      throw std::invalid_argument("interleaved_count: edge outside the bit windows");
    }
    if (t < previous) throw std::invalid_argument("interleaved_count: edges not sorted");
    previous = t;
    while (t >= boundary) swap_roles();
    ++counter[active];
  }
  while (bit < n_bits) swap_roles();
  return out;
}

BitStream decide(const BitWindowCounts& counts, int n_t) {
  if (n_t < 0) throw std::invalid_argument("decide: threshold must be non-negative");
  BitStream out;
  out.bit_time = counts.bit_time;
  out.bits.reserve(counts.size());
  for (auto c : counts.counts) out.bits.push_back(c > static_cast<std::uint32_t>(n_t) ? 1 : 0);
  return out;
}

BerReport ber_measure(const BitStream& tx, const BitStream& rx) {
  if (tx.size() != rx.size()) throw std::invalid_argument("ber_measure: length mismatch");
  if (tx.size() == 0) throw std::invalid_argument("ber_measure: empty streams");
  BerReport r;
  r.n_bits = tx.size();
  for (std::size_t i = 0; i < tx.size(); ++i) r.n_errors += (tx.bits[i] != rx.bits[i]) ? 1 : 0;
  r.ber = static_cast<double>(r.n_errors) / static_cast<double>(r.n_bits);
  return r;
}

Bathtub bathtub(const BitWindowCounts& counts, const BitStream& tx, int n_t_min, int n_t_max) {
  if (counts.size() != tx.size()) throw std::invalid_argument("bathtub: streams not aligned");
  if (n_t_min < 0 || n_t_max < n_t_min) throw std::invalid_argument("bathtub: bad threshold range");
  Bathtub out;
  for (int n_t = n_t_min; n_t <= n_t_max; ++n_t) {
    const auto r = ber_measure(tx, decide(counts, n_t));
    out.rows.push_back({n_t, r.n_bits, r.n_errors, r.ber});
    if (r.n_errors < out.rows[out.best].n_errors) out.best = out.rows.size() - 1;
  }
  return out;
}

}  // namespace sipmlink
