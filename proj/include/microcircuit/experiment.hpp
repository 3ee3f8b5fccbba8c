#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "microcircuit/config.hpp"
#include "microcircuit/engine.hpp"
#include "microcircuit/rescale.hpp"
#include "microcircuit/stats.hpp"

namespace microcircuit {

inline constexpr std::string_view kVersion = "1.0.0";

/// Fully resolved description of one run. Persisted next to its outputs;
/// rerunning it reproduces every artifact bit for bit.
struct ExperimentManifest {
  std::string config_path;  ///< empty: built-in canonical parameters
  double scale = 1.0;
  InputMode input_mode = InputMode::kPoissonBalanced;
  double duration_ms = 60000.0;
  double dt_ms = 0.1;
  double transient_ms = 100.0;
  std::uint64_t seed = 55;
  std::string sampling = "per-pop:1000:cap";
  double sync_window_ms = 0.0;
  std::string output_dir = "out";
  bool binary_spikes = false;
  std::string dump_network_path;

  nlohmann::json to_json() const;
  static ExperimentManifest from_json(const nlohmann::json& j);
  static ExperimentManifest load(const std::filesystem::path& path);
};

/// Config file (or canonical) with the manifest's experiment fields applied.
ModelConfig resolve_config(const ExperimentManifest& m);

struct RunResult {
  ScaledModel scaled;
  SpikeRecord record;
  StatsReport stats;
};

/// Rescale, build, simulate and analyze. Writes manifest.json, rescale.json,
/// spikes.txt|spikes.bin, stats.json and stats.csv into m.output_dir.
RunResult execute(const ExperimentManifest& m, int workers, std::ostream* log = nullptr);

/// Same pipeline without touching the filesystem.
RunResult simulate(const ExperimentManifest& m, int workers, std::ostream* log = nullptr);

/// Empty record with the population layout, dt and windows a run of `m`
/// would produce; used to read back spike files.
SpikeRecord record_layout(const ExperimentManifest& m);

/// Rescaling below which the DC-driven network is expected to fall silent.
inline constexpr double kDcSilenceScale = 0.1;

struct SweepRow {
  InputMode mode;
  double scale;
  StatsReport stats;
  bool expected_silence = false;
};

/// Runs the (mode x scale) grid with `base` as template; each run lands in
/// base.output_dir/<mode>/k<scale>. Throws on an empty scale or mode list.
std::vector<SweepRow> sweep(const ExperimentManifest& base, const std::vector<double>& scales,
                            const std::vector<InputMode>& modes, int workers, std::ostream* log = nullptr);

/// statistic,input_mode,scale_percent,<pop>,<pop>_rel_dev...,note with
/// deviations |x - x_100| / x_100 against the k = 1 row of the same mode.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace microcircuit
