// microcircuit: rescale, build, simulate and analyze the cortical microcircuit.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "microcircuit/experiment.hpp"
#include "microcircuit/parallel.hpp"
#include "microcircuit/spike_io.hpp"

namespace mc = microcircuit;

namespace {

/// Binds the experiment flags of one subcommand. Values from --manifest (or
/// --config's experiment block) are the base; flags given explicitly win.
class ManifestFlags {
 public:
  explicit ManifestFlags(CLI::App* app) : app_(app) {
    app->add_option("--manifest", manifest_path_, "Load a saved manifest.json as the base")
        ->check(CLI::ExistingFile);
    bind("--config", &mc::ExperimentManifest::config_path, "Model configuration JSON");
    bind("--scale", &mc::ExperimentManifest::scale, "Rescaling factor k");
    app->add_option("--input-mode", input_mode_, "poisson-balanced | dc-balanced | poisson-unbalanced");
    bind("--duration", &mc::ExperimentManifest::duration_ms, "Simulated time in ms");
    bind("--dt", &mc::ExperimentManifest::dt_ms, "Time step in ms");
    bind("--transient", &mc::ExperimentManifest::transient_ms, "Initial period excluded from statistics, ms");
    bind("--seed", &mc::ExperimentManifest::seed, "Master seed");
    bind("--sample", &mc::ExperimentManifest::sampling, "all | fraction:N | per-pop:N[:cap]");
    bind("--sync-window", &mc::ExperimentManifest::sync_window_ms, "Synchrony window in ms (0: whole record)");
    bind("--out", &mc::ExperimentManifest::output_dir, "Output directory");
  }

  void add_output_flags() {
    app_->add_flag("--binary-spikes", flags_.binary_spikes, "Write spikes.bin instead of spikes.txt");
    setters_.push_back([this](mc::ExperimentManifest& m) {
      if (app_->count("--binary-spikes")) m.binary_spikes = flags_.binary_spikes;
    });
    bind("--dump-network", &mc::ExperimentManifest::dump_network_path, "Write a binary adjacency dump");
  }

  mc::ExperimentManifest resolve() const {
    mc::ExperimentManifest m;
    if (!manifest_path_.empty()) {
      m = mc::ExperimentManifest::load(manifest_path_);
    } else if (app_->count("--config")) {
      const mc::ModelConfig c = mc::load_config(flags_.config_path);
      m.input_mode = c.external.mode;
      m.dt_ms = c.experiment.dt_ms;
      m.duration_ms = c.experiment.duration_ms;
      m.transient_ms = c.experiment.transient_ms;
      m.seed = c.experiment.seed;
    }
    for (const auto& set : setters_) set(m);
    if (app_->count("--input-mode")) m.input_mode = mc::parse_input_mode(input_mode_);
    return m;
  }

 private:
  template <typename T>
  void bind(const std::string& flag, T mc::ExperimentManifest::*field, const std::string& help) {
    app_->add_option(flag, flags_.*field, help);
    setters_.push_back([this, flag, field](mc::ExperimentManifest& m) {
      if (app_->count(flag)) m.*field = flags_.*field;
    });
  }

  CLI::App* app_;
  std::string manifest_path_;
  std::string input_mode_;
  mc::ExperimentManifest flags_;
  std::vector<std::function<void(mc::ExperimentManifest&)>> setters_;
};

std::vector<double> parse_scales(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double k = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad scale '" + item + "'");
    out.push_back(k);
  }
  return out;
}

std::vector<mc::InputMode> parse_modes(const std::string& text) {
  std::vector<mc::InputMode> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(mc::parse_input_mode(item));
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potjans-Diesmann cortical microcircuit: rescaling, simulation and spike statistics"};
  app.set_version_flag("--version", std::string(mc::kVersion));
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write its artifacts");
  ManifestFlags run_flags(run_cmd);
  run_flags.add_output_flags();

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of scales and input modes, emit a summary CSV");
  ManifestFlags sweep_flags(sweep_cmd);
  std::string scales_text = "1,0.8,0.6,0.5,0.4,0.3,0.2,0.1,0.05,0.02,0.01";
  std::string modes_text = "poisson-balanced";
  sweep_cmd->add_option("--scales", scales_text, "Comma separated list of k");
  sweep_cmd->add_option("--modes", modes_text, "Comma separated list of input modes");

  auto* rescale_cmd = app.add_subcommand("rescale-report", "Print the scale transform as JSON");
  ManifestFlags rescale_flags(rescale_cmd);

  auto* stats_cmd = app.add_subcommand("stats", "Recompute statistics from an existing spike file");
  ManifestFlags stats_flags(stats_cmd);
  std::string spikes_path;
  stats_cmd->add_option("--spikes", spikes_path, "spikes.txt or spikes.bin")->required()->check(CLI::ExistingFile);

  auto* raster_cmd = app.add_subcommand("raster", "Export sampled raster points as CSV");
  ManifestFlags raster_flags(raster_cmd);
  std::string raster_spikes;
  std::int64_t raster_count = 1862;
  double raster_from = 0.0;
  double raster_to = 0.0;
  std::string raster_out;
  raster_cmd->add_option("--spikes", raster_spikes, "spikes.txt or spikes.bin")->required()->check(CLI::ExistingFile);
  raster_cmd->add_option("--count", raster_count, "Neurons sampled over all populations");
  raster_cmd->add_option("--from", raster_from, "Start time in ms");
  raster_cmd->add_option("--to", raster_to, "End time in ms (0: end of record)");
  raster_cmd->add_option("--output", raster_out, "CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  const int workers = mc::default_worker_count();
  try {
    if (*run_cmd) {
      const auto m = run_flags.resolve();
      const auto r = mc::execute(m, workers, &std::cerr);
      std::cout << mc::to_csv(r.stats);
    } else if (*sweep_cmd) {
      auto base = sweep_flags.resolve();
      const auto rows = mc::sweep(base, parse_scales(scales_text), parse_modes(modes_text), workers, &std::cerr);
      const std::string csv = mc::sweep_csv(rows);
      write_file(std::filesystem::path(base.output_dir) / "sweep.csv", csv);
      std::cout << csv;
    } else if (*rescale_cmd) {
      const auto m = rescale_flags.resolve();
      const auto scaled = mc::apply_transform(mc::resolve_config(m), m.scale);
      std::cout << mc::to_json(scaled.transform).dump(2) << '\n';
    } else if (*stats_cmd) {
      const auto m = stats_flags.resolve();
      const auto record = mc::read_spikes(spikes_path, mc::record_layout(m));
      const auto report =
          mc::report(record, mc::SamplingPlan::parse(m.sampling, m.seed), {3.0, m.sync_window_ms});
      std::cout << mc::to_json(report).dump(2) << '\n';
    } else if (*raster_cmd) {
      const auto m = raster_flags.resolve();
      const auto record = mc::read_spikes(raster_spikes, mc::record_layout(m));
      mc::SamplingPlan plan;
      plan.n = raster_count;
      plan.seed = m.seed;
      const auto ids = mc::resolve_sampling(plan, record.populations);
      const double to = raster_to > 0.0 ? raster_to : record.duration_ms;
      std::ostringstream csv;
      csv << "time_ms,neuron_id,population\n";
      for (const auto& p : mc::raster(record, ids, raster_from, to)) {
        int pop = 0;
        while (p.neuron >= record.populations[pop].end) ++pop;
        csv << p.time_ms << ',' << p.neuron << ',' << mc::kPopulationNames[pop] << '\n';
      }
      if (raster_out.empty())
        std::cout << csv.str();
      else
        write_file(raster_out, csv.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
