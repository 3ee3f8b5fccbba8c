#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace microcircuit {

inline constexpr int kNumPopulations = 8;

/// Per-population column vector, indexed in canonical order L2e..L6i.
template <typename Scalar>
using PopVector = Eigen::Matrix<Scalar, kNumPopulations, 1>;

/// Population-pair matrix indexed (post, pre).
template <typename Scalar>
using PopMatrix = Eigen::Matrix<Scalar, kNumPopulations, kNumPopulations>;

using CountVector = PopVector<std::int64_t>;
using CountMatrix = PopMatrix<std::int64_t>;
using RealVector = PopVector<double>;
using RealMatrix = PopMatrix<double>;

inline constexpr std::array<std::string_view, kNumPopulations> kPopulationNames = {
    "L2e", "L2i", "L4e", "L4i", "L5e", "L5i", "L6e", "L6i"};

/// Even indices are excitatory, odd inhibitory.
constexpr bool is_excitatory(int population) { return population % 2 == 0; }

/// Index of `name` in kPopulationNames, or -1.
constexpr int population_index(std::string_view name) {
  for (int i = 0; i < kNumPopulations; ++i)
    if (kPopulationNames[i] == name) return i;
  return -1;
}

using NeuronId = std::uint32_t;

}  // namespace microcircuit
