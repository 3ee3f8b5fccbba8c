#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "microcircuit/types.hpp"

namespace microcircuit {

/// Thrown for unreadable, malformed or invariant-violating configurations.
/// The message names the failing invariant and field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InputMode { kPoissonBalanced, kDcBalanced, kPoissonUnbalanced };

/// "poisson_balanced" / "poisson-balanced" style names are both accepted.
InputMode parse_input_mode(std::string_view text);
std::string_view to_string(InputMode mode);

/// Poisson-driven modes draw spike counts; the DC mode injects the mean.
constexpr bool is_poisson(InputMode mode) { return mode != InputMode::kDcBalanced; }

struct PopulationSpec {
  std::string name;
  std::int64_t size = 0;
  std::int64_t ext_indegree_balanced = 0;
  std::int64_t ext_indegree_unbalanced = 0;
  double full_scale_rate_hz = 0.0;
  std::array<double, 2> depth_range_um{0.0, 0.0};

  bool operator==(const PopulationSpec&) const = default;
};

/// One projection pre -> post. Weight is the PSC amplitude.
struct ConnectionSpec {
  int pre = 0;
  int post = 0;
  double probability = 0.0;
  double weight_mean_pa = 0.0;
  double weight_rel_sd = 0.0;
  double delay_mean_ms = 0.0;
  double delay_rel_sd = 0.0;
};

/// Dense connectivity tables, every matrix indexed (post, pre).
struct ConnectivitySpec {
  RealMatrix probability = RealMatrix::Zero();
  RealMatrix weight_mean_pa = RealMatrix::Zero();
  RealMatrix weight_rel_sd = RealMatrix::Zero();
  RealMatrix delay_mean_ms = RealMatrix::Zero();
  RealMatrix delay_rel_sd = RealMatrix::Zero();

  ConnectionSpec rule(int post, int pre) const;
  /// Rules with p > 0.
  int active_rules() const;

  bool operator==(const ConnectivitySpec& o) const {
    return probability == o.probability && weight_mean_pa == o.weight_mean_pa &&
           weight_rel_sd == o.weight_rel_sd && delay_mean_ms == o.delay_mean_ms &&
           delay_rel_sd == o.delay_rel_sd;
  }
};

struct ExternalInputSpec {
  InputMode mode = InputMode::kPoissonBalanced;
  double rate_per_input_hz = 0.0;
  double weight_pa = 0.0;

  bool operator==(const ExternalInputSpec&) const = default;
};

struct NeuronModelSpec {
  double tau_m_ms = 10.0;
  double tau_syn_ms = 0.5;
  double c_m_pf = 250.0;
  double v_rest_mv = -65.0;
  double v_reset_mv = -65.0;
  double v_theta_mv = -50.0;
  double t_ref_ms = 2.0;
  double v_init_mean_mv = -58.0;
  double v_init_sd_mv = 10.0;

  bool operator==(const NeuronModelSpec&) const = default;
};

struct GeometrySpec {
  double depth_um = 1470.0;
  double diameter_um = 300.0;

  bool operator==(const GeometrySpec&) const = default;
};

struct ExperimentSpec {
  double dt_ms = 0.1;
  double duration_ms = 60000.0;
  double transient_ms = 100.0;
  std::uint64_t seed = 55;

  bool operator==(const ExperimentSpec&) const = default;
};

struct ModelConfig {
  int schema_version = 1;
  std::array<PopulationSpec, kNumPopulations> populations;
  ConnectivitySpec connectivity;
  ExternalInputSpec external;
  NeuronModelSpec neuron;
  GeometrySpec geometry;
  ExperimentSpec experiment;

  CountVector sizes() const;
  std::int64_t total_neurons() const { return sizes().sum(); }
  /// External in-degrees for the configured input mode. The DC mode uses the
  /// balanced in-degrees to derive its equivalent current.
  CountVector ext_indegrees() const;
  RealVector full_scale_rates() const;

  bool operator==(const ModelConfig& o) const {
    return schema_version == o.schema_version && populations == o.populations &&
           connectivity == o.connectivity && external == o.external && neuron == o.neuron &&
           geometry == o.geometry && experiment == o.experiment;
  }
};

inline constexpr std::int64_t kCanonicalTotalNeurons = 77169;

struct ValidationOptions {
  /// Full-scale files must sum to kCanonicalTotalNeurons. Rescaled configs
  /// turn this off.
  bool require_canonical_total = true;
};

/// Throws ConfigError on the first violated invariant.
void validate(const ModelConfig& config, const ValidationOptions& options = {});

/// The shipped full-scale parameter set.
ModelConfig canonical_config();

ModelConfig config_from_json(const nlohmann::json& j, const ValidationOptions& options = {});
nlohmann::json to_json(const ModelConfig& config);

/// Accepts // and /* */ comments.
ModelConfig parse_config(std::string_view text, const ValidationOptions& options = {});
ModelConfig load_config(const std::filesystem::path& path, const ValidationOptions& options = {});
void save_config(const ModelConfig& config, const std::filesystem::path& path);

}  // namespace microcircuit
