#pragma once

// End-to-end link configuration and its JSON form.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "sipmlink/analog_chain.hpp"
#include "sipmlink/digital_receiver.hpp"
#include "sipmlink/poisson_theory.hpp"
#include "sipmlink/random.hpp"
#include "sipmlink/sipm_frontend.hpp"

namespace sipmlink {

enum class SimMode { kIdealCounts, kFullWaveform };

std::string to_string(SimMode mode);
/// Accepts "ideal", "ideal-counts", "waveform", "full-waveform".
SimMode parse_sim_mode(const std::string& text);

struct LinkConfig {
  LinkParams link;
  SiPMParams sipm = SiPMParams::calibrated();
  AnalogChainConfig chain;
  LfsrConfig prbs;
  std::size_t n_bits = 100000;
  double sample_rate = 1e9;
  RngSeed master_seed{1};
  SimMode mode = SimMode::kIdealCounts;
  /// Fixed decision threshold; when empty the bathtub optimum is used.
  std::optional<int> n_t;
  /// Bits per waveform chunk in full-waveform mode. Results do not depend on it.
  std::size_t chunk_bits = 10000;

  void validate() const;

  /// Real-time receiver equivalent: one amplifier stage giving ~40 mV
  /// single-photon pulses, AC coupled, 18 mV / 5 mV hysteresis comparator,
  /// 5 ns minimum digital width, 1 GS/s.
  static LinkConfig experimental();
  /// Gain/bandwidth study chain: 1 mV threshold with 25% hysteresis,
  /// DC coupled, no digital width limit, 10 GS/s.
  static LinkConfig gbp_study(const AmplifierConfig& amp);
};

/// Reads a JSON config. Missing keys keep the values of `base`.
LinkConfig load_link_config(const std::filesystem::path& path,
                            const LinkConfig& base = LinkConfig::experimental());
LinkConfig parse_link_config(const std::string& json_text,
                             const LinkConfig& base = LinkConfig::experimental());
/// Full JSON form (every field present).
std::string dump_link_config(const LinkConfig& cfg);

}  // namespace sipmlink
