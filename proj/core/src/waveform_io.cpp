#include "sipmlink/waveform_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "sipmlink/csv.hpp"

namespace sipmlink {
namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw std::runtime_error("waveform frame truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number in waveform CSV: " + s);
  return v;
}

bool has_suffix(const std::filesystem::path& p, const char* ext) { return p.extension() == ext; }

}  // namespace

void write_waveform_csv(std::ostream& os, const Waveform& w) {
  os << "time_s,volts\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    os << format_double(w.time(i)) << ',' << format_double(w.samples[i]) << '\n';
  }
}

Waveform read_waveform_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || split_csv_line(line) != std::vector<std::string>{"time_s", "volts"}) {
    throw std::runtime_error("waveform CSV must start with header time_s,volts");
  }
  std::vector<double> times;
  Waveform w;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) throw std::runtime_error("waveform CSV row must have 2 fields");
    times.push_back(parse_double(fields[0]));
    w.samples.push_back(parse_double(fields[1]));
  }
  if (times.size() < 2) throw std::runtime_error("waveform CSV needs at least two samples");
  w.t0 = times.front();
  w.sample_rate = static_cast<double>(times.size() - 1) / (times.back() - times.front());
  w.validate();
  return w;
}

void write_waveform_binary(std::ostream& os, const Waveform& w) {
  put_le<double>(os, w.sample_rate);
  put_le<std::uint64_t>(os, w.samples.size());
  for (double v : w.samples) put_le<float>(os, static_cast<float>(v));
}

Waveform read_waveform_binary(std::istream& is) {
  Waveform w;
  w.sample_rate = get_le<double>(is);
  const auto count = get_le<std::uint64_t>(is);
  w.samples.resize(count);
  for (auto& v : w.samples) v = static_cast<double>(get_le<float>(is));
  w.validate();
  return w;
}

void save_waveform(const std::filesystem::path& path, const Waveform& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  if (has_suffix(path, ".csv")) {
    write_waveform_csv(os, w);
  } else {
    write_waveform_binary(os, w);
  }
}

Waveform load_waveform(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return has_suffix(path, ".csv") ? read_waveform_csv(is) : read_waveform_binary(is);
}

}  // namespace sipmlink
