#include "microcircuit/engine.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <span>
#include <stdexcept>
#include <thread>

#include "microcircuit/parallel.hpp"

namespace microcircuit {

Simulator::Simulator(const NetworkInstance& net, std::uint64_t seed, int workers)
    : net_(net),
      workers_(std::max(1, workers)),
      prop_(LifPropagator<double>::make(net.neuron, net.dt_ms)),
      drive_key_(random::make_key(seed, random::Domain::kExternalDrive)),
      ring_slots_(static_cast<std::size_t>(net.max_delay_steps) + 1) {
  const std::size_t n = net.num_neurons();
  for (int p = 0; p < kNumPopulations; ++p) {
    const auto& d = net.drive[p];
    if (d.poisson_indegree > 0) poisson_[p] = PoissonDrive(d.poisson_indegree, d.rate_hz, d.weight_pa, net.dt_ms);
  }
  population_.resize(n);
  dc_.resize(static_cast<Eigen::Index>(n));
  for (int p = 0; p < kNumPopulations; ++p)
    for (NeuronId i = net.populations[p].begin; i < net.populations[p].end; ++i) {
      population_[i] = static_cast<std::uint8_t>(p);
      dc_(i) = net.drive[p].dc_pa + net.dc_compensation_pa(i);
    }
  v_ = init_membrane(net.neuron, n, random::make_key(seed, random::Domain::kMembraneInit));
  i_syn_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  refractory_.assign(n, 0);
  ring_.assign(ring_slots_ * n, 0.0);
}

void Simulator::update_range(std::size_t begin, std::size_t end, std::uint32_t t, std::vector<NeuronId>& spikes) {
  spikes.clear();
  const std::size_t n = net_.num_neurons();
  double* slot = ring_.data() + (t % ring_slots_) * n;
  NeuronState<double> s;
  for (std::size_t i = begin; i < end; ++i) {
    double input = slot[i];
    slot[i] = 0.0;
    const PoissonDrive& drive = poisson_[population_[i]];
    if (drive.mean_count > 0.0) {
      random::CounterRng rng(drive_key_, i, t);
      input += drive.increment(rng);
    }
    s.v_mv = v_(static_cast<Eigen::Index>(i));
    s.i_syn_pa = i_syn_(static_cast<Eigen::Index>(i));
    s.refractory_remaining = refractory_[i];
    s.dc_pa = dc_(static_cast<Eigen::Index>(i));
    if (step(s, prop_, net_.neuron, input)) spikes.push_back(static_cast<NeuronId>(i));
    v_(static_cast<Eigen::Index>(i)) = s.v_mv;
    i_syn_(static_cast<Eigen::Index>(i)) = s.i_syn_pa;
    refractory_[i] = s.refractory_remaining;
  }
}

void Simulator::deliver_range(std::size_t begin, std::size_t end, std::uint32_t t,
                              std::span<const NeuronId> sources) {
  const std::size_t n = net_.num_neurons();
  const bool whole = begin == 0 && end == n;
  const auto by_target = [](const Synapse& syn, std::size_t id) { return syn.target < id; };
  for (NeuronId src : sources) {
    auto syns = net_.outgoing(src);
    auto first = syns.begin();
    auto last = syns.end();
    if (!whole) {
      first = std::lower_bound(first, last, begin, by_target);
      last = std::lower_bound(first, last, end, by_target);
    }
    for (auto it = first; it != last; ++it)
      ring_[((t + it->delay_steps) % ring_slots_) * n + it->target] += static_cast<double>(it->weight_pa);
  }
}

void Simulator::advance(std::uint32_t steps) {
  const std::size_t n = net_.num_neurons();
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers_), std::max<std::size_t>(n, 1)));
  // Double-buffered by step parity: lists of step t are read while step t+1 is written.
  std::array<std::vector<std::vector<NeuronId>>, 2> spikes;
  for (auto& buf : spikes) buf.resize(static_cast<std::size_t>(workers));
  std::barrier sync(workers);
  const std::uint32_t first = step_;

  auto body = [&](int w) {
    const auto [b, e] = partition_range(n, workers, w);
    for (std::uint32_t s = 0; s < steps; ++s) {
      const std::uint32_t t = first + s;
      auto& lists = spikes[t & 1u];
      update_range(b, e, t, lists[static_cast<std::size_t>(w)]);
      if (workers > 1) sync.arrive_and_wait();
      for (const auto& list : lists) deliver_range(b, e, t, list);
      if (w == 0)
        for (const auto& list : lists)
          for (NeuronId id : list) events_.push_back({t, id});
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 1; w < workers; ++w) threads.emplace_back(body, w);
    body(0);
  }
  step_ = first + steps;
}

Eigen::VectorXd init_membrane(const NeuronModelSpec& n, std::size_t count, const random::Key& key,
                              std::uint64_t first_id) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    random::CounterRng rng(key, first_id + i);
    v(static_cast<Eigen::Index>(i)) = n.v_init_mean_mv + n.v_init_sd_mv * rng.normal();
  }
  return v;
}

SpikeRecord run(const NetworkInstance& net, const RunOptions& options) {
  if (!(options.duration_ms > options.transient_ms))
    throw std::invalid_argument("duration must exceed the transient");
  const double steps = std::round(options.duration_ms / net.dt_ms);
  if (steps > 4.0e9) throw std::invalid_argument("duration too long for 32-bit step counter");
  SpikeRecord record;
  record.dt_ms = net.dt_ms;
  record.duration_ms = options.duration_ms;
  record.transient_ms = options.transient_ms;
  record.populations = net.populations;
  if (net.num_neurons() == 0) return record;
  Simulator sim(net, options.seed, options.workers);
  sim.advance(static_cast<std::uint32_t>(steps));
  record.events = sim.take_events();
  return record;
}

}  // namespace microcircuit
