#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "microcircuit/engine.hpp"

namespace microcircuit {

enum class SamplingStrategy { kFixedFractionTotal, kFixedPerPopulation, kAll };

struct SamplingPlan {
  SamplingStrategy strategy = SamplingStrategy::kFixedFractionTotal;
  /// Total for kFixedFractionTotal, per population for kFixedPerPopulation.
  std::int64_t n = 8000;
  std::uint64_t seed = 1;
  /// Take the whole population when it is smaller than the request instead of
  /// failing ("1000 per population where available").
  bool cap_at_population = false;

  /// "all", "fraction:8000", "per-pop:1000", "per-pop:1000:cap".
  static SamplingPlan parse(std::string_view text, std::uint64_t seed = 1);
  std::string to_string() const;

  /// Per-population sample sizes. kFixedFractionTotal rounds n * N_i / sum(N)
  /// to nearest. Throws std::invalid_argument naming the population when a
  /// request exceeds its size (unless capped).
  CountVector resolve_counts(const CountVector& sizes) const;
};

using SampledIds = std::array<std::vector<NeuronId>, kNumPopulations>;

/// Uniform random subset (sorted ids) of each population; deterministic in plan.seed.
SampledIds resolve_sampling(const SamplingPlan& plan, const std::array<IdRange, kNumPopulations>& populations);

/// Analysis window (from, to] in ms.
struct Window {
  double from_ms = 0.0;
  double to_ms = 0.0;
};

/// Default window: (transient, duration].
Window analysis_window(const SpikeRecord& record);

/// Spikes of `ids` in the window per neuron per second.
double mean_rate(const SpikeRecord& record, std::span<const NeuronId> ids, double duration_ms, double transient_ms);

/// Population standard deviation of the ISIs over their mean.
std::optional<double> train_cv(std::span<const double> spike_times);

/// Mean of per-neuron CV ISI over neurons with at least two spikes in the
/// window; absent when there are none.
std::optional<double> cv_isi(const SpikeRecord& record, std::span<const NeuronId> ids);
std::optional<double> cv_isi(const SpikeRecord& record, std::span<const NeuronId> ids, Window window);

/// Variance over mean of the pooled spike count in `bin_ms` bins covering the
/// window (trailing partial bin dropped); absent when no spikes fall inside.
std::optional<double> synchrony(const SpikeRecord& record, std::span<const NeuronId> ids, double bin_ms = 3.0);
std::optional<double> synchrony(const SpikeRecord& record, std::span<const NeuronId> ids, double bin_ms,
                                Window window);

struct PopulationStats {
  std::string name;
  std::int64_t sampled = 0;
  double mean_rate_hz = 0.0;
  std::optional<double> irregularity;
  std::optional<double> synchrony;
};

struct StatsOptions {
  double bin_ms = 3.0;
  /// Synchrony window length after the transient; 0 means the whole record.
  double sync_window_ms = 0.0;
};

struct StatsReport {
  std::array<PopulationStats, kNumPopulations> populations;
  double duration_ms = 0.0;
  double transient_ms = 0.0;
  double bin_ms = 3.0;
  double sync_window_ms = 0.0;
  SamplingPlan plan;
  CountVector sampled_counts = CountVector::Zero();
};

StatsReport report(const SpikeRecord& record, const SamplingPlan& plan, const StatsOptions& options = {});

nlohmann::json to_json(const StatsReport& report);
/// Header plus one row per population.
std::string to_csv(const StatsReport& report);

/// Sampled (time_ms, id) pairs within [from_ms, to_ms] for raster plots.
struct RasterPoint {
  double time_ms = 0.0;
  NeuronId neuron = 0;
};
std::vector<RasterPoint> raster(const SpikeRecord& record, const SampledIds& ids, double from_ms, double to_ms);

}  // namespace microcircuit
