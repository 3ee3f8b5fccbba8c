#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "microcircuit/lif.hpp"
#include "microcircuit/network.hpp"

namespace microcircuit {

/// Spike emitted during step `step`; its time is the end of that step.
struct SpikeEvent {
  std::uint32_t step = 0;
  NeuronId neuron = 0;

  bool operator==(const SpikeEvent&) const = default;
};

struct SpikeRecord {
  double dt_ms = 0.1;
  double duration_ms = 0.0;
  /// Activity before this time is excluded from statistics by default.
  double transient_ms = 100.0;
  std::array<IdRange, kNumPopulations> populations{};
  /// Ordered by (step, neuron).
  std::vector<SpikeEvent> events;

  double time_ms(const SpikeEvent& e) const { return static_cast<double>(e.step + 1) * dt_ms; }
  std::size_t num_neurons() const { return populations.back().end; }

  bool operator==(const SpikeRecord&) const = default;
};

/// Clock-driven simulation of a NetworkInstance. Exposes stepping and state so
/// callers can trace individual neurons.
class Simulator {
 public:
  Simulator(const NetworkInstance& net, std::uint64_t seed, int workers = 1);

  /// Runs `steps` further steps, appending spikes to events().
  void advance(std::uint32_t steps);

  std::uint32_t current_step() const { return step_; }
  const Eigen::VectorXd& membrane() const { return v_; }
  const Eigen::VectorXd& synaptic_current() const { return i_syn_; }
  const std::vector<SpikeEvent>& events() const { return events_; }
  std::vector<SpikeEvent> take_events() { return std::move(events_); }

 private:
  void update_range(std::size_t begin, std::size_t end, std::uint32_t t, std::vector<NeuronId>& spikes);
  void deliver_range(std::size_t begin, std::size_t end, std::uint32_t t, std::span<const NeuronId> sources);

  const NetworkInstance& net_;
  int workers_;
  LifPropagator<double> prop_;
  random::Key drive_key_;
  std::array<PoissonDrive, kNumPopulations> poisson_{};
  std::vector<std::uint8_t> population_;
  Eigen::VectorXd v_;
  Eigen::VectorXd i_syn_;
  Eigen::VectorXd dc_;
  std::vector<std::int64_t> refractory_;
  std::size_t ring_slots_;
  /// Slot-major ring of pending synaptic input: ring_[slot * N + target].
  std::vector<double> ring_;
  std::uint32_t step_ = 0;
  std::vector<SpikeEvent> events_;
};

struct RunOptions {
  double duration_ms = 1000.0;
  double transient_ms = 100.0;
  std::uint64_t seed = 55;
  int workers = 1;
};

/// Simulates `net` for the requested duration from the seeded initial state.
/// Output is a pure function of (net, duration, seed); `workers` only changes
/// wall-clock time.
SpikeRecord run(const NetworkInstance& net, const RunOptions& options);

}  // namespace microcircuit
