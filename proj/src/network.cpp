#include "microcircuit/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "microcircuit/lif.hpp"
#include "microcircuit/parallel.hpp"

namespace microcircuit {

namespace {

SynapseEndpoints draw_endpoints(random::CounterRng& rng, IdRange pre, IdRange post) {
  const auto s = static_cast<NeuronId>(pre.begin + rng.uniform_int(pre.size()));
  const auto t = static_cast<NeuronId>(post.begin + rng.uniform_int(post.size()));
  return {s, t};
}

std::uint64_t pair_stream(int post, int pre) { return static_cast<std::uint64_t>(post * kNumPopulations + pre); }

void check_pair(std::int64_t count, IdRange pre, IdRange post) {
  if (count < 0) throw std::invalid_argument("negative synapse count");
  if (count > 0 && (pre.empty() || post.empty()))
    throw std::invalid_argument("cannot place " + std::to_string(count) + " synapses with an empty population");
  if (count > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max()))
    throw std::invalid_argument("synapse count per pair exceeds 2^32 - 1");
}

void put_varint(std::ostream& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.put(static_cast<char>((v & 0x7F) | 0x80));
    v >>= 7;
  }
  out.put(static_cast<char>(v));
}

}  // namespace

int NetworkInstance::population_of(NeuronId id) const {
  for (int p = 0; p < kNumPopulations; ++p)
    if (id < populations[p].end) return p;
  throw std::out_of_range("neuron id " + std::to_string(id) + " outside the network");
}

CountMatrix NetworkInstance::pair_counts() const {
  CountMatrix counts = CountMatrix::Zero();
  for (int pre = 0; pre < kNumPopulations; ++pre)
    for (NeuronId s = populations[pre].begin; s < populations[pre].end; ++s)
      for (const Synapse& syn : outgoing(s)) ++counts(population_of(syn.target), pre);
  return counts;
}

std::size_t NetworkInstance::memory_bytes() const {
  return synapses.capacity() * sizeof(Synapse) + offsets.capacity() * sizeof(std::uint64_t);
}

SynapseEndpoints draw_synapse(const random::Key& key, std::uint64_t stream, std::uint32_t index, IdRange pre,
                              IdRange post) {
  random::CounterRng rng(key, stream, index);
  return draw_endpoints(rng, pre, post);
}

std::vector<SynapseEndpoints> draw_synapses(std::int64_t count, IdRange pre, IdRange post, const random::Key& key,
                                            std::uint64_t stream) {
  check_pair(count, pre, post);
  std::vector<SynapseEndpoints> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i)
    out.push_back(draw_synapse(key, stream, static_cast<std::uint32_t>(i), pre, post));
  return out;
}

WeightDelay draw_weight_delay(const ConnectionSpec& rule, double dt_ms, random::CounterRng& rng) {
  const double zw = rng.normal();
  const double zd = rng.normal();
  double w = rule.weight_mean_pa + rule.weight_rel_sd * std::abs(rule.weight_mean_pa) * zw;
  w = rule.weight_mean_pa >= 0.0 ? std::max(w, 0.0) : std::min(w, 0.0);
  const double d = std::max(rule.delay_mean_ms + rule.delay_rel_sd * rule.delay_mean_ms * zd, dt_ms);
  const double steps = std::round(d / dt_ms);
  const double capped = std::min(steps, static_cast<double>(std::numeric_limits<std::uint16_t>::max() - 1));
  return {w, static_cast<std::uint16_t>(std::max(capped, 1.0))};
}

Eigen::Matrix3Xd place_neurons(const ModelConfig& config, const random::Key& key) {
  const auto ranges = population_ranges(config.sizes());
  const double radius = 0.5 * config.geometry.diameter_um;
  Eigen::Matrix3Xd pos(3, static_cast<Eigen::Index>(ranges.back().end));
  for (int p = 0; p < kNumPopulations; ++p) {
    const auto [lo, hi] = config.populations[p].depth_range_um;
    for (NeuronId n = ranges[p].begin; n < ranges[p].end; ++n) {
      random::CounterRng rng(key, n);
      const double r = radius * std::sqrt(rng.uniform());
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      pos.col(n) << r * std::cos(theta), lo + (hi - lo) * rng.uniform(), r * std::sin(theta);
    }
  }
  return pos;
}

std::array<IdRange, kNumPopulations> population_ranges(const CountVector& sizes) {
  std::array<IdRange, kNumPopulations> ranges;
  std::uint64_t next = 0;
  for (int p = 0; p < kNumPopulations; ++p) {
    if (sizes(p) < 0) throw std::invalid_argument("negative population size");
    const std::uint64_t end = next + static_cast<std::uint64_t>(sizes(p));
    if (end > std::numeric_limits<NeuronId>::max()) throw std::invalid_argument("network exceeds 2^32 neurons");
    ranges[p] = {static_cast<NeuronId>(next), static_cast<NeuronId>(end)};
    next = end;
  }
  return ranges;
}

NetworkInstance build(const ScaledModel& scaled, std::uint64_t seed, int workers) {
  const ModelConfig& cfg = scaled.config;
  const ScaleTransform& t = scaled.transform;
  if (cfg.sizes() != t.scaled_sizes) throw std::invalid_argument("config and transform disagree on population sizes");

  NetworkInstance net;
  net.dt_ms = cfg.experiment.dt_ms;
  net.input_mode = cfg.external.mode;
  net.neuron = cfg.neuron;
  net.populations = population_ranges(t.scaled_sizes);
  const std::size_t n = net.num_neurons();

  for (int p = 0; p < kNumPopulations; ++p) {
    const CountVector indegree = cfg.ext_indegrees();
    auto& d = net.drive[p];
    d.rate_hz = cfg.external.rate_per_input_hz;
    d.weight_pa = cfg.external.weight_pa;
    if (is_poisson(cfg.external.mode)) {
      d.poisson_indegree = indegree(p);
    } else {
      d.dc_pa = dc_drive_equivalent(indegree(p), d.rate_hz, d.weight_pa, cfg.neuron.tau_syn_ms);
    }
  }
  net.dc_compensation_pa.resize(static_cast<Eigen::Index>(n));
  for (int p = 0; p < kNumPopulations; ++p)
    net.dc_compensation_pa.segment(net.populations[p].begin, static_cast<Eigen::Index>(net.populations[p].size()))
        .setConstant(t.dc_compensation_pa(p));

  net.positions = place_neurons(cfg, random::make_key(seed, random::Domain::kPlacement));

  for (int post = 0; post < kNumPopulations; ++post)
    for (int pre = 0; pre < kNumPopulations; ++pre)
      check_pair(t.scaled_pair_synapses(post, pre), net.populations[pre], net.populations[post]);

  const random::Key key = random::make_key(seed, random::Domain::kConnectivity);

  // Pass 1: out-degree per source. Each worker owns whole source populations.
  std::vector<std::uint64_t> outdeg(n + 1, 0);
  parallel_for(workers, kNumPopulations, [&](std::size_t b, std::size_t e) {
    for (auto pre = static_cast<int>(b); pre < static_cast<int>(e); ++pre)
      for (int post = 0; post < kNumPopulations; ++post) {
        const auto count = t.scaled_pair_synapses(post, pre);
        for (std::int64_t i = 0; i < count; ++i) {
          const auto ep = draw_synapse(key, pair_stream(post, pre), static_cast<std::uint32_t>(i),
                                       net.populations[pre], net.populations[post]);
          ++outdeg[ep.pre];
        }
      }
  });
  net.offsets.assign(n + 1, 0);
  for (std::size_t s = 0; s < n; ++s) net.offsets[s + 1] = net.offsets[s] + outdeg[s];
  net.synapses.resize(net.offsets[n]);

  // Pass 2: regenerate each stream and fill in (pair, index) order.
  std::vector<std::uint16_t> max_delay(kNumPopulations, 1);
  parallel_for(workers, kNumPopulations, [&](std::size_t b, std::size_t e) {
    std::vector<std::uint64_t> cursor;
    for (auto pre = static_cast<int>(b); pre < static_cast<int>(e); ++pre) {
      const IdRange src = net.populations[pre];
      cursor.assign(net.offsets.begin() + src.begin, net.offsets.begin() + src.end);
      for (int post = 0; post < kNumPopulations; ++post) {
        const auto count = t.scaled_pair_synapses(post, pre);
        const ConnectionSpec rule = cfg.connectivity.rule(post, pre);
        for (std::int64_t i = 0; i < count; ++i) {
          random::CounterRng rng(key, pair_stream(post, pre), static_cast<std::uint32_t>(i));
          const auto ep = draw_endpoints(rng, src, net.populations[post]);
          const auto wd = draw_weight_delay(rule, net.dt_ms, rng);
          net.synapses[cursor[ep.pre - src.begin]++] = {ep.post, static_cast<float>(wd.weight_pa), wd.delay_steps};
          max_delay[pre] = std::max(max_delay[pre], wd.delay_steps);
        }
      }
      for (NeuronId s = src.begin; s < src.end; ++s)
        std::stable_sort(net.synapses.begin() + static_cast<std::ptrdiff_t>(net.offsets[s]),
                         net.synapses.begin() + static_cast<std::ptrdiff_t>(net.offsets[s + 1]),
                         [](const Synapse& a, const Synapse& b) { return a.target < b.target; });
    }
  });
  net.max_delay_steps = *std::max_element(max_delay.begin(), max_delay.end());
  return net;
}

void dump_network(const NetworkInstance& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write network dump " + path.string());
  out.write("MCNET001", 8);
  const std::uint64_t n = net.num_neurons();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (NeuronId s = 0; s < n; ++s) {
    const auto syns = net.outgoing(s);
    put_varint(out, syns.size());
    for (const Synapse& syn : syns) {
      put_varint(out, syn.target);
      out.write(reinterpret_cast<const char*>(&syn.weight_pa), sizeof syn.weight_pa);
      put_varint(out, syn.delay_steps);
    }
  }
  if (!out) throw std::runtime_error("failed writing network dump " + path.string());
}

}  // namespace microcircuit
