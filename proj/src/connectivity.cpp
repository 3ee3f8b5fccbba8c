#include "microcircuit/connectivity.hpp"

#include <cmath>
#include <stdexcept>

namespace microcircuit {

std::int64_t exact_synapse_count(double p, std::int64_t n_pre, std::int64_t n_post) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("connection probability must lie in [0, 1)");
  if (n_pre < 1 || n_post < 1) throw std::invalid_argument("population sizes must be >= 1");
  if (p == 0.0) return 0;
  const double pairs = static_cast<double>(n_pre) * static_cast<double>(n_post);
  // log1p keeps ln(1 - 1/pairs) accurate when pairs is large.
  return std::llround(std::log1p(-p) / std::log1p(-1.0 / pairs));
}

CountMatrix pair_synapse_counts(const ModelConfig& config) {
  CountMatrix counts;
  for (int post = 0; post < kNumPopulations; ++post)
    for (int pre = 0; pre < kNumPopulations; ++pre)
      counts(post, pre) = exact_synapse_count(config.connectivity.probability(post, pre),
                                              config.populations[pre].size, config.populations[post].size);
  return counts;
}

}  // namespace microcircuit
