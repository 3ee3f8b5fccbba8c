#include "microcircuit/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "microcircuit/network.hpp"
#include "microcircuit/spike_io.hpp"

namespace microcircuit {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string scale_dir(double k) {
  std::ostringstream s;
  s << "k" << k;
  return s.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

json ExperimentManifest::to_json() const {
  return {{"version", kVersion},
          {"config_path", config_path},
          {"scale", scale},
          {"input_mode", to_string(input_mode)},
          {"duration_ms", duration_ms},
          {"dt_ms", dt_ms},
          {"transient_ms", transient_ms},
          {"seed", seed},
          {"sampling", sampling},
          {"sync_window_ms", sync_window_ms},
          {"output_dir", output_dir},
          {"binary_spikes", binary_spikes},
          {"dump_network_path", dump_network_path}};
}

ExperimentManifest ExperimentManifest::from_json(const json& j) {
  ExperimentManifest m;
  m.config_path = j.value("config_path", m.config_path);
  m.scale = j.value("scale", m.scale);
  m.input_mode = parse_input_mode(j.value("input_mode", std::string(to_string(m.input_mode))));
  m.duration_ms = j.value("duration_ms", m.duration_ms);
  m.dt_ms = j.value("dt_ms", m.dt_ms);
  m.transient_ms = j.value("transient_ms", m.transient_ms);
  m.seed = j.value("seed", m.seed);
  m.sampling = j.value("sampling", m.sampling);
  m.sync_window_ms = j.value("sync_window_ms", m.sync_window_ms);
  m.output_dir = j.value("output_dir", m.output_dir);
  m.binary_spikes = j.value("binary_spikes", m.binary_spikes);
  m.dump_network_path = j.value("dump_network_path", m.dump_network_path);
  return m;
}

ExperimentManifest ExperimentManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid manifest " + path.string() + ": " + e.what());
  }
}

ModelConfig resolve_config(const ExperimentManifest& m) {
  ModelConfig c = m.config_path.empty() ? canonical_config() : load_config(m.config_path);
  c.external.mode = m.input_mode;
  c.experiment = {m.dt_ms, m.duration_ms, m.transient_ms, m.seed};
  validate(c);
  return c;
}

RunResult simulate(const ExperimentManifest& m, int workers, std::ostream* log) {
  const SamplingPlan plan = SamplingPlan::parse(m.sampling, m.seed);
  Stopwatch clock;
  RunResult r{apply_transform(resolve_config(m), m.scale), {}, {}};
  plan.resolve_counts(r.scaled.transform.scaled_sizes);
  for (const auto& w : r.scaled.transform.warnings)
    if (log) *log << "warning: " << w << '\n';
  if (!is_poisson(m.input_mode) && m.scale < kDcSilenceScale && log)
    *log << "warning: DC input below k=" << kDcSilenceScale << " is expected to silence the network\n";

  const NetworkInstance net = build(r.scaled, m.seed, workers);
  if (log)
    *log << "built " << net.num_neurons() << " neurons, " << net.num_synapses() << " synapses in " << clock.seconds()
         << " s\n";
  if (!m.dump_network_path.empty()) dump_network(net, m.dump_network_path);

  Stopwatch sim_clock;
  r.record = run(net, {m.duration_ms, m.transient_ms, m.seed, workers});
  if (log)
    *log << "simulated " << m.duration_ms << " ms (" << r.record.events.size() << " spikes) in "
         << sim_clock.seconds() << " s\n";
  r.stats = report(r.record, plan, {3.0, m.sync_window_ms});
  return r;
}

RunResult execute(const ExperimentManifest& m, int workers, std::ostream* log) {
  const fs::path dir = m.output_dir;
  fs::create_directories(dir);
  write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");
  RunResult r = simulate(m, workers, log);
  write_text(dir / "rescale.json", to_json(r.scaled.transform).dump(2) + "\n");
  if (m.binary_spikes)
    write_spikes_binary(r.record, dir / "spikes.bin");
  else
    write_spikes_text(r.record, dir / "spikes.txt");
  write_text(dir / "stats.json", to_json(r.stats).dump(2) + "\n");
  write_text(dir / "stats.csv", to_csv(r.stats));
  return r;
}

SpikeRecord record_layout(const ExperimentManifest& m) {
  const ScaledModel scaled = apply_transform(resolve_config(m), m.scale);
  SpikeRecord rec;
  rec.dt_ms = m.dt_ms;
  rec.duration_ms = m.duration_ms;
  rec.transient_ms = m.transient_ms;
  rec.populations = population_ranges(scaled.config.sizes());
  return rec;
}

std::vector<SweepRow> sweep(const ExperimentManifest& base, const std::vector<double>& scales,
                            const std::vector<InputMode>& modes, int workers, std::ostream* log) {
  if (scales.empty()) throw std::invalid_argument("sweep needs at least one scale");
  if (modes.empty()) throw std::invalid_argument("sweep needs at least one input mode");
  for (double k : scales) check_scale(k);
  std::vector<SweepRow> rows;
  for (InputMode mode : modes) {
    for (double k : scales) {
      ExperimentManifest m = base;
      m.scale = k;
      m.input_mode = mode;
      m.output_dir = (fs::path(base.output_dir) / std::string(to_string(mode)) / scale_dir(k)).string();
      if (log) *log << "== " << to_string(mode) << " k=" << k << '\n';
      RunResult r = execute(m, workers, log);
      rows.push_back({mode, k, std::move(r.stats), !is_poisson(mode) && k < kDcSilenceScale});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(6);
  out << "statistic,input_mode,scale_percent";
  for (auto name : kPopulationNames) out << ',' << name << ',' << name << "_rel_dev";
  out << ",note\n";

  using Getter = std::optional<double> (*)(const PopulationStats&);
  const std::pair<const char*, Getter> statistics[] = {
      {"mean_rate_Hz", [](const PopulationStats& p) -> std::optional<double> { return p.mean_rate_hz; }},
      {"irregularity_cv_isi", [](const PopulationStats& p) { return p.irregularity; }},
      {"synchrony", [](const PopulationStats& p) { return p.synchrony; }},
  };
  for (const auto& [name, get] : statistics) {
    std::map<InputMode, const SweepRow*> reference;
    for (const auto& row : rows)
      if (row.scale == 1.0) reference[row.mode] = &row;
    for (const auto& row : rows) {
      out << name << ',' << to_string(row.mode) << ',' << row.scale * 100.0;
      const auto ref = reference.find(row.mode);
      for (int p = 0; p < kNumPopulations; ++p) {
        const auto v = get(row.stats.populations[p]);
        out << ',';
        if (v) out << *v;
        out << ',';
        if (v && ref != reference.end()) {
          const auto v100 = get(ref->second->stats.populations[p]);
          if (v100 && *v100 != 0.0) out << std::abs(*v - *v100) / *v100;
        }
      }
      out << ',' << (row.expected_silence ? "expected_silence" : "") << '\n';
    }
  }
  return out.str();
}

}  // namespace microcircuit
