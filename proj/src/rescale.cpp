#include "microcircuit/rescale.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "microcircuit/connectivity.hpp"

namespace microcircuit {

namespace {

// pA * ms * Hz -> pA
constexpr double kMsHz = 1e-3;

double relative_floor_guard() { return 8.0 * std::numeric_limits<double>::epsilon(); }

// Mean current per neuron from recurrent synapses at full scale, summed per
// pair with the actual pair weights.
RealVector full_scale_recurrent_input(const ModelConfig& config, const CountMatrix& counts) {
  const RealVector sizes = config.sizes().cast<double>();
  const RealMatrix indegree = counts.cast<double>().array().colwise() / sizes.array();
  const RealMatrix per_pair = indegree.cwiseProduct(config.connectivity.weight_mean_pa);
  return per_pair * config.full_scale_rates() * config.neuron.tau_syn_ms * kMsHz;
}

RealVector full_scale_external_input(const ModelConfig& config) {
  return config.ext_indegrees().cast<double>() * config.external.weight_pa * config.external.rate_per_input_hz *
         config.neuron.tau_syn_ms * kMsHz;
}

}  // namespace

void check_scale(double k) {
  if (!std::isfinite(k) || !(k > 0.0)) throw std::invalid_argument("scale factor must be > 0, got " + std::to_string(k));
}

std::int64_t scaled_count(double k, std::int64_t n) {
  const double x = k * static_cast<double>(n);
  return static_cast<std::int64_t>(std::floor(x * (1.0 + relative_floor_guard())));
}

CountVector scale_population_sizes(const CountVector& sizes, double k) {
  check_scale(k);
  return sizes.unaryExpr([k](std::int64_t n) { return scaled_count(k, n); });
}

CountVector scale_external_indegrees(const CountVector& indegrees, double k) {
  check_scale(k);
  return indegrees.unaryExpr([k](std::int64_t n) { return scaled_count(k, n); });
}

CountMatrix scale_pair_synapse_counts(const CountMatrix& counts, double k) {
  check_scale(k);
  const double k2 = k * k;
  return counts.unaryExpr([k2](std::int64_t n) { return scaled_count(k2, n); });
}

double scale_weights(double weight_pa, double k) {
  check_scale(k);
  return weight_pa / std::sqrt(k);
}

RealVector dc_compensation(const ModelConfig& config, double k) {
  check_scale(k);
  for (int i = 0; i < kNumPopulations; ++i)
    if (!std::isfinite(config.populations[i].full_scale_rate_hz) || config.populations[i].full_scale_rate_hz < 0.0)
      throw std::invalid_argument("missing full-scale rate for " + config.populations[i].name);
  const CountMatrix counts = pair_synapse_counts(config);
  const RealVector full = full_scale_recurrent_input(config, counts) + full_scale_external_input(config);
  return (1.0 - std::sqrt(k)) * full;
}

MeanInput analytic_mean_input(const ModelConfig& config, double k) {
  check_scale(k);
  const CountMatrix counts = pair_synapse_counts(config);
  const double sk = std::sqrt(k);
  MeanInput m;
  // In-degree k*K at weight W/sqrt(k); written out rather than folded into sqrt(k).
  m.recurrent = (k * full_scale_recurrent_input(config, counts)) / sk;
  m.external = (k * full_scale_external_input(config)) / sk;
  m.compensation = dc_compensation(config, k);
  return m;
}

ScaledModel apply_transform(const ModelConfig& config, double k) {
  check_scale(k);
  ScaledModel out{config, {}};
  auto& t = out.transform;
  t.k = k;
  t.scaled_sizes = scale_population_sizes(config.sizes(), k);
  t.full_pair_synapses = pair_synapse_counts(config);
  t.scaled_pair_synapses = scale_pair_synapse_counts(t.full_pair_synapses, k);
  t.weight_factor = 1.0 / std::sqrt(k);
  t.dc_compensation_pa = dc_compensation(config, k);
  if (k > 1.0) t.warnings.push_back("k > 1: upscaled network, statistics are not validated in this regime");

  CountVector ext_balanced, ext_unbalanced;
  for (int i = 0; i < kNumPopulations; ++i) {
    ext_balanced(i) = config.populations[i].ext_indegree_balanced;
    ext_unbalanced(i) = config.populations[i].ext_indegree_unbalanced;
  }
  ext_balanced = scale_external_indegrees(ext_balanced, k);
  ext_unbalanced = scale_external_indegrees(ext_unbalanced, k);

  if (k == 1.0) {
    t.scaled_ext_indegrees = config.ext_indegrees();
    return out;
  }

  auto& c = out.config;
  for (int i = 0; i < kNumPopulations; ++i) {
    auto& p = c.populations[i];
    p.size = t.scaled_sizes(i);
    p.ext_indegree_balanced = ext_balanced(i);
    p.ext_indegree_unbalanced = ext_unbalanced(i);
    if (p.size == 0)
      t.warnings.push_back("population " + p.name + " is empty at this scale; its statistics are undefined");
  }
  c.connectivity.weight_mean_pa = scale_weights(config.connectivity.weight_mean_pa, k);
  c.external.weight_pa = scale_weights(config.external.weight_pa, k);
  t.scaled_ext_indegrees = c.ext_indegrees();
  return out;
}

nlohmann::json to_json(const ScaleTransform& t) {
  using nlohmann::json;
  json j;
  j["k"] = t.k;
  j["weight_factor"] = t.weight_factor;
  json pops = json::array();
  for (int i = 0; i < kNumPopulations; ++i) {
    pops.push_back({{"name", kPopulationNames[i]},
                    {"scaled_size", t.scaled_sizes(i)},
                    {"scaled_ext_indegree", t.scaled_ext_indegrees(i)},
                    {"dc_compensation_pA", t.dc_compensation_pa(i)}});
  }
  j["populations"] = pops;
  j["total_neurons"] = t.scaled_sizes.sum();
  json pairs = json::array();
  for (int post = 0; post < kNumPopulations; ++post)
    for (int pre = 0; pre < kNumPopulations; ++pre)
      pairs.push_back({{"pre", kPopulationNames[pre]},
                       {"post", kPopulationNames[post]},
                       {"full_scale_synapses", t.full_pair_synapses(post, pre)},
                       {"scaled_synapses", t.scaled_pair_synapses(post, pre)}});
  j["pair_synapses"] = pairs;
  j["total_synapses"] = t.scaled_pair_synapses.sum();
  j["warnings"] = t.warnings;
  return j;
}

}  // namespace microcircuit
