#pragma once

// Waveform file formats.
//
// CSV: header line "time_s,volts", then one sample per line.
//
// Binary frame, little-endian:
//   float64  sample_rate (Hz)
//   uint64   count
//   float32  samples[count]
// t0 is not stored; frames read back with t0 = 0.

#include <filesystem>
#include <iosfwd>

#include "sipmlink/sipm_frontend.hpp"

namespace sipmlink {

void write_waveform_csv(std::ostream& os, const Waveform& w);
Waveform read_waveform_csv(std::istream& is);

void write_waveform_binary(std::ostream& os, const Waveform& w);
Waveform read_waveform_binary(std::istream& is);

void save_waveform(const std::filesystem::path& path, const Waveform& w);
Waveform load_waveform(const std::filesystem::path& path);

}  // namespace sipmlink
