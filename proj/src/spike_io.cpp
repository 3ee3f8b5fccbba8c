#include "microcircuit/spike_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace microcircuit {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'S', 'P', 'I', 'K', 'E', '1'};

int time_decimals(double dt_ms) {
  const int d = static_cast<int>(std::ceil(-std::log10(dt_ms) - 1e-9));
  return std::clamp(d, 1, 9);
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated binary spike file");
  return v;
}

}  // namespace

void write_spikes_text(const SpikeRecord& record, std::ostream& out) {
  const int decimals = time_decimals(record.dt_ms);
  char buf[64];
  for (const SpikeEvent& e : record.events) {
    auto r = std::to_chars(buf, buf + sizeof buf, record.time_ms(e), std::chars_format::fixed, decimals);
    *r.ptr++ = '\t';
    r = std::to_chars(r.ptr, buf + sizeof buf, e.neuron);
    *r.ptr++ = '\n';
    out.write(buf, r.ptr - buf);
  }
}

void write_spikes_text(const SpikeRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write spike file " + path.string());
  write_spikes_text(record, out);
  if (!out) throw std::runtime_error("failed writing spike file " + path.string());
}

void write_spikes_binary(const SpikeRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write spike file " + path.string());
  out.write(kMagic, sizeof kMagic);
  put(out, record.dt_ms);
  put(out, record.duration_ms);
  put(out, record.transient_ms);
  put(out, static_cast<std::uint64_t>(record.events.size()));
  for (const SpikeEvent& e : record.events) {
    put(out, e.step);
    put(out, e.neuron);
  }
  if (!out) throw std::runtime_error("failed writing spike file " + path.string());
}

SpikeRecord read_spikes(const std::filesystem::path& path, const SpikeRecord& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open spike file " + path.string());
  SpikeRecord rec = layout;
  rec.events.clear();
  const std::size_t n = rec.num_neurons();

  char magic[sizeof kMagic] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() == sizeof magic && std::memcmp(magic, kMagic, sizeof kMagic) == 0) {
    rec.dt_ms = get<double>(in);
    rec.duration_ms = get<double>(in);
    rec.transient_ms = get<double>(in);
    const auto count = get<std::uint64_t>(in);
    rec.events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      SpikeEvent e;
      e.step = get<std::uint32_t>(in);
      e.neuron = get<std::uint32_t>(in);
      if (e.neuron >= n) throw std::runtime_error("spike file references neuron outside the network");
      rec.events.push_back(e);
    }
    return rec;
  }

  in.clear();
  in.seekg(0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("malformed spike line " + std::to_string(lineno));
    double t = 0.0;
    std::uint32_t id = 0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    if (std::from_chars(first, first + tab, t).ec != std::errc{} ||
        std::from_chars(first + tab + 1, last, id).ec != std::errc{})
      throw std::runtime_error("malformed spike line " + std::to_string(lineno));
    if (id >= n) throw std::runtime_error("spike file references neuron outside the network");
    const long long step = std::llround(t / rec.dt_ms) - 1;
    if (step < 0) throw std::runtime_error("spike time before the first step at line " + std::to_string(lineno));
    const SpikeEvent e{static_cast<std::uint32_t>(step), id};
    if (!rec.events.empty() &&
        (e.step < rec.events.back().step || (e.step == rec.events.back().step && e.neuron < rec.events.back().neuron)))
      throw std::runtime_error("spike file not sorted by time at line " + std::to_string(lineno));
    rec.events.push_back(e);
  }
  return rec;
}

}  // namespace microcircuit
