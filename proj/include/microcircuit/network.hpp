#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "microcircuit/config.hpp"
#include "microcircuit/connectivity.hpp"
#include "microcircuit/random.hpp"
#include "microcircuit/rescale.hpp"
#include "microcircuit/types.hpp"

namespace microcircuit {

/// Outgoing synapse. 12 bytes; sources are implicit in the CSR layout.
struct Synapse {
  NeuronId target = 0;
  float weight_pa = 0.0f;
  std::uint16_t delay_steps = 1;
};
static_assert(sizeof(Synapse) <= 16);

/// Half-open id range [begin, end).
struct IdRange {
  NeuronId begin = 0;
  NeuronId end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool contains(NeuronId id) const { return id >= begin && id < end; }
  bool operator==(const IdRange&) const = default;
};

/// External drive shared by all neurons of a population.
struct PopulationDrive {
  std::int64_t poisson_indegree = 0;  ///< 0 when the drive is DC
  double rate_hz = 0.0;
  double weight_pa = 0.0;
  double dc_pa = 0.0;  ///< DC-equivalent of the external input (DC mode only)
};

struct NetworkInstance {
  double dt_ms = 0.1;
  InputMode input_mode = InputMode::kPoissonBalanced;
  NeuronModelSpec neuron;
  std::array<IdRange, kNumPopulations> populations;
  /// Columns are (x, y, z) in um; y is cortical depth.
  Eigen::Matrix3Xd positions;
  std::array<PopulationDrive, kNumPopulations> drive;
  /// Per neuron: rescaling compensation current (pA).
  Eigen::VectorXd dc_compensation_pa;
  /// CSR adjacency: synapses of source s are synapses[offsets[s] .. offsets[s+1]),
  /// sorted by target.
  std::vector<std::uint64_t> offsets;
  std::vector<Synapse> synapses;
  std::uint16_t max_delay_steps = 1;

  std::size_t num_neurons() const { return populations.back().end; }
  std::size_t num_synapses() const { return synapses.size(); }
  int population_of(NeuronId id) const;
  std::span<const Synapse> outgoing(NeuronId source) const {
    return {synapses.data() + offsets[source], synapses.data() + offsets[source + 1]};
  }
  /// Total DC (external DC + compensation) for neuron `id`.
  double dc_pa(NeuronId id) const { return drive[population_of(id)].dc_pa + dc_compensation_pa(id); }
  /// Realized synapse totals per (post, pre) pair, by scanning the adjacency.
  CountMatrix pair_counts() const;
  std::size_t memory_bytes() const;
};

struct SynapseEndpoints {
  NeuronId pre = 0;
  NeuronId post = 0;

  bool operator==(const SynapseEndpoints&) const = default;
};

/// Stream of pair `pair_stream` in the connectivity domain of `seed`.
/// Synapse i of a pair reads substream i, so any synapse can be regenerated
/// independently of the others.
SynapseEndpoints draw_synapse(const random::Key& key, std::uint64_t pair_stream, std::uint32_t index, IdRange pre,
                              IdRange post);

/// Exactly `count` synapses, endpoints uniform with replacement (multapses and
/// autapses allowed). Throws std::invalid_argument if count > 0 and a range is empty.
std::vector<SynapseEndpoints> draw_synapses(std::int64_t count, IdRange pre, IdRange post, const random::Key& key,
                                            std::uint64_t pair_stream);

struct WeightDelay {
  double weight_pa = 0.0;
  std::uint16_t delay_steps = 1;
};

/// Weight ~ N(mean, rel_sd |mean|) clipped at 0 so it keeps the sign of the
/// mean; delay ~ N(mean, rel_sd mean) clipped below at dt and rounded to steps.
WeightDelay draw_weight_delay(const ConnectionSpec& rule, double dt_ms, random::CounterRng& rng);

/// Area-uniform in the disc, uniform in the population's depth band.
Eigen::Matrix3Xd place_neurons(const ModelConfig& config, const random::Key& key);

std::array<IdRange, kNumPopulations> population_ranges(const CountVector& sizes);

/// Materializes `scaled` (from apply_transform) for `seed`. The result is a
/// pure function of (scaled, seed): worker count only changes speed.
NetworkInstance build(const ScaledModel& scaled, std::uint64_t seed, int workers = 1);

/// Writes the adjacency dump: "MCNET001", u64 neuron count, then per source a
/// varint synapse count followed by (varint target, f32 weight, varint delay).
void dump_network(const NetworkInstance& net, const std::filesystem::path& path);

}  // namespace microcircuit
