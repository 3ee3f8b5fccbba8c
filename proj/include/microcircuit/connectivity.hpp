#pragma once

#include <cstdint>

#include "microcircuit/config.hpp"
#include "microcircuit/types.hpp"

namespace microcircuit {

/// Total synapses realizing connection probability p between populations of
/// the given sizes when pairs are drawn uniformly with replacement:
/// round(ln(1 - p) / ln(1 - 1 / (n_pre * n_post))). Zero for p == 0.
/// Throws std::invalid_argument for p outside [0, 1) or empty populations.
std::int64_t exact_synapse_count(double p, std::int64_t n_pre, std::int64_t n_post);

/// exact_synapse_count over every (post, pre) pair of `config`.
CountMatrix pair_synapse_counts(const ModelConfig& config);

}  // namespace microcircuit
