#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "microcircuit/config.hpp"
#include "microcircuit/types.hpp"

namespace microcircuit {

/// Everything that changes when the network is resized by a factor k:
/// counts by k (neurons, external inputs), pair synapse totals by k^2,
/// weights by 1/sqrt(k), plus a DC current restoring the lost mean input.
struct ScaleTransform {
  double k = 1.0;
  CountVector scaled_sizes = CountVector::Zero();
  CountVector scaled_ext_indegrees = CountVector::Zero();
  /// Full-scale exact pair totals C and their floor(k^2 C), (post, pre).
  CountMatrix full_pair_synapses = CountMatrix::Zero();
  CountMatrix scaled_pair_synapses = CountMatrix::Zero();
  double weight_factor = 1.0;
  RealVector dc_compensation_pa = RealVector::Zero();
  std::vector<std::string> warnings;
};

struct ScaledModel {
  ModelConfig config;
  ScaleTransform transform;
};

/// floor(k * n) guarded against the last-ulp error of the product.
std::int64_t scaled_count(double k, std::int64_t n);

CountVector scale_population_sizes(const CountVector& sizes, double k);
CountVector scale_external_indegrees(const CountVector& indegrees, double k);
CountMatrix scale_pair_synapse_counts(const CountMatrix& counts, double k);

template <typename Derived>
auto scale_weights(const Eigen::MatrixBase<Derived>& weights, double k) {
  return (weights / std::sqrt(k)).eval();
}
double scale_weights(double weight_pa, double k);

/// Per-population DC current (pA) replacing the mean input removed by
/// downscaling, for the input mode stored in `config`.
RealVector dc_compensation(const ModelConfig& config, double k);

/// Analytic mean synaptic current per neuron (pA) of the rescaled network,
/// using un-truncated k-scaled in-degrees.
struct MeanInput {
  RealVector recurrent = RealVector::Zero();
  RealVector external = RealVector::Zero();
  RealVector compensation = RealVector::Zero();

  RealVector total() const { return recurrent + external + compensation; }
};
MeanInput analytic_mean_input(const ModelConfig& config, double k);

/// Returns the resized configuration and its transform; `config` is untouched.
ScaledModel apply_transform(const ModelConfig& config, double k);

nlohmann::json to_json(const ScaleTransform& transform);

/// Throws std::invalid_argument unless k is finite and positive.
void check_scale(double k);

}  // namespace microcircuit
