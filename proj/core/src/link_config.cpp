#include "sipmlink/link_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "json.hpp"

namespace sipmlink {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->template get<T>();
}

}  // namespace

std::string to_string(SimMode mode) {
  return mode == SimMode::kIdealCounts ? "ideal-counts" : "full-waveform";
}

SimMode parse_sim_mode(const std::string& text) {
  if (text == "ideal" || text == "ideal-counts") return SimMode::kIdealCounts;
  if (text == "waveform" || text == "full-waveform") return SimMode::kFullWaveform;
  throw std::invalid_argument("unknown mode '" + text + "' (use ideal or waveform)");
}

void LinkConfig::validate() const {
  link.validate();
  if (n_bits < 1) throw std::invalid_argument("LinkConfig: n_bits must be >= 1");
  if (chunk_bits < 1) throw std::invalid_argument("LinkConfig: chunk_bits must be >= 1");
  if (n_t && *n_t < 0) throw std::invalid_argument("LinkConfig: n_t must be >= 0");
  prbs.validate();
  if (mode == SimMode::kFullWaveform) {
    sipm.validate();
    if (!(sample_rate >= min_synthesis_rate(sipm.tau_rise))) {
      throw std::invalid_argument("LinkConfig: sample_rate too low for tau_rise");
    }
    chain.amp.validate(sample_rate);
    chain.comparator.validate();
    if (!(chain.min_width >= 0.0)) throw std::invalid_argument("LinkConfig: min_width must be >= 0");
    if (chain.ac_coupled && !(chain.highpass_cutoff > 0.0 && chain.highpass_cutoff < 0.5 * sample_rate)) {
      throw std::invalid_argument("LinkConfig: highpass_cutoff must lie in (0, sample_rate/2)");
    }
  }
}

LinkConfig LinkConfig::experimental() {
  LinkConfig cfg;
  cfg.mode = SimMode::kFullWaveform;
  cfg.sample_rate = 1e9;
  cfg.chain.amp = {180.0, 400e6};
  cfg.chain.comparator = {18e-3, 5e-3};
  cfg.chain.ac_coupled = true;
  cfg.chain.highpass_cutoff = 100e3;
  cfg.chain.min_width = kDefaultMinPulseWidth;
  return cfg;
}

LinkConfig LinkConfig::gbp_study(const AmplifierConfig& amp) {
  LinkConfig cfg;
  cfg.mode = SimMode::kFullWaveform;
  cfg.sample_rate = 10e9;
  cfg.chain.amp = amp;
  cfg.chain.comparator = {kMinComparatorThreshold, 0.25 * kMinComparatorThreshold};
  cfg.chain.ac_coupled = false;
  cfg.chain.min_width = 0.0;
  return cfg;
}

LinkConfig parse_link_config(const std::string& json_text, const LinkConfig& base) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  LinkConfig cfg = base;
  try {
    reject_unknown(root, "config",
                   {"link", "sipm", "amplifier", "noise", "comparator", "ac_coupled",
                    "highpass_cutoff", "min_width", "prbs", "n_bits", "sample_rate", "seed",
                    "mode", "n_t", "chunk_bits"});
    if (auto it = root.find("link"); it != root.end()) {
      reject_unknown(*it, "link",
                     {"wavelength", "pde", "data_rate", "dark_count_rate", "avg_optical_power",
                      "avg_optical_power_dbm"});
      read(*it, "wavelength", cfg.link.wavelength);
      read(*it, "pde", cfg.link.pde);
      read(*it, "data_rate", cfg.link.data_rate);
      read(*it, "dark_count_rate", cfg.link.dark_count_rate);
      read(*it, "avg_optical_power", cfg.link.avg_optical_power);
      if (it->contains("avg_optical_power_dbm")) {
        if (it->contains("avg_optical_power")) {
          throw std::invalid_argument("link: give avg_optical_power or avg_optical_power_dbm, not both");
        }
        cfg.link.avg_optical_power = dbm_to_watts(it->at("avg_optical_power_dbm").get<double>());
      }
    }
    if (auto it = root.find("sipm"); it != root.end()) {
      reject_unknown(*it, "sipm",
                     {"n_microcells", "recovery_time", "single_pe_amplitude", "tau_rise",
                      "tau_fall", "amplitude_spread"});
      read(*it, "n_microcells", cfg.sipm.n_microcells);
      read(*it, "recovery_time", cfg.sipm.recovery_time);
      read(*it, "single_pe_amplitude", cfg.sipm.single_pe_amplitude);
      read(*it, "tau_rise", cfg.sipm.tau_rise);
      read(*it, "tau_fall", cfg.sipm.tau_fall);
      read(*it, "amplitude_spread", cfg.sipm.amplitude_spread);
    }
    if (auto it = root.find("amplifier"); it != root.end()) {
      reject_unknown(*it, "amplifier", {"gain", "bandwidth"});
      read(*it, "gain", cfg.chain.amp.gain);
      read(*it, "bandwidth", cfg.chain.amp.bandwidth);
    }
    if (auto it = root.find("noise"); it != root.end()) {
      reject_unknown(*it, "noise", {"input_psd"});
      read(*it, "input_psd", cfg.chain.noise.input_psd);
    }
    if (auto it = root.find("comparator"); it != root.end()) {
      reject_unknown(*it, "comparator", {"v_th", "hysteresis"});
      read(*it, "v_th", cfg.chain.comparator.v_th);
      read(*it, "hysteresis", cfg.chain.comparator.hysteresis);
    }
    read(root, "ac_coupled", cfg.chain.ac_coupled);
    read(root, "highpass_cutoff", cfg.chain.highpass_cutoff);
    read(root, "min_width", cfg.chain.min_width);
    if (auto it = root.find("prbs"); it != root.end()) {
      reject_unknown(*it, "prbs", {"width", "taps", "seed"});
      read(*it, "width", cfg.prbs.width);
      read(*it, "taps", cfg.prbs.taps);
      read(*it, "seed", cfg.prbs.seed);
    }
    read(root, "n_bits", cfg.n_bits);
    read(root, "sample_rate", cfg.sample_rate);
    read(root, "seed", cfg.master_seed.value);
    read(root, "chunk_bits", cfg.chunk_bits);
    if (auto it = root.find("mode"); it != root.end()) cfg.mode = parse_sim_mode(it->get<std::string>());
    if (auto it = root.find("n_t"); it != root.end()) {
      if (it->is_null()) {
        cfg.n_t.reset();
      } else {
        cfg.n_t = it->get<int>();
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

LinkConfig load_link_config(const std::filesystem::path& path, const LinkConfig& base) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_link_config(ss.str(), base);
}

std::string dump_link_config(const LinkConfig& cfg) {
  json root = {
      {"link",
       {{"wavelength", cfg.link.wavelength},
        {"pde", cfg.link.pde},
        {"data_rate", cfg.link.data_rate},
        {"dark_count_rate", cfg.link.dark_count_rate},
        {"avg_optical_power", cfg.link.avg_optical_power}}},
      {"sipm",
       {{"n_microcells", cfg.sipm.n_microcells},
        {"recovery_time", cfg.sipm.recovery_time},
        {"single_pe_amplitude", cfg.sipm.single_pe_amplitude},
        {"tau_rise", cfg.sipm.tau_rise},
        {"tau_fall", cfg.sipm.tau_fall},
        {"amplitude_spread", cfg.sipm.amplitude_spread}}},
      {"amplifier", {{"gain", cfg.chain.amp.gain}, {"bandwidth", cfg.chain.amp.bandwidth}}},
      {"noise", {{"input_psd", cfg.chain.noise.input_psd}}},
      {"comparator",
       {{"v_th", cfg.chain.comparator.v_th}, {"hysteresis", cfg.chain.comparator.hysteresis}}},
      {"ac_coupled", cfg.chain.ac_coupled},
      {"highpass_cutoff", cfg.chain.highpass_cutoff},
      {"min_width", cfg.chain.min_width},
      {"prbs", {{"width", cfg.prbs.width}, {"taps", cfg.prbs.taps}, {"seed", cfg.prbs.seed}}},
      {"n_bits", cfg.n_bits},
      {"sample_rate", cfg.sample_rate},
      {"seed", cfg.master_seed.value},
      {"mode", to_string(cfg.mode)},
      {"n_t", cfg.n_t ? json(*cfg.n_t) : json(nullptr)},
      {"chunk_bits", cfg.chunk_bits},
  };
  return root.dump(2) + "\n";
}

}  // namespace sipmlink
