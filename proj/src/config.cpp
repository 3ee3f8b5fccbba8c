#include "microcircuit/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace microcircuit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& invariant, const std::string& field) {
  throw ConfigError("invalid configuration: " + invariant + " (field: " + field + ")");
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail("missing required field", where + "." + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("wrong type", where + "." + key);
  }
}

template <typename T>
T optional(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return require<T>(j, key, where);
}

int require_population(const json& j, const char* key, const std::string& where) {
  const auto name = require<std::string>(j, key, where);
  const int idx = population_index(name);
  if (idx < 0) fail("unknown population '" + name + "'", where + "." + key);
  return idx;
}

}  // namespace

InputMode parse_input_mode(std::string_view text) {
  std::string s(text);
  for (char& c : s)
    if (c == '-') c = '_';
  if (s == "poisson_balanced") return InputMode::kPoissonBalanced;
  if (s == "dc_balanced") return InputMode::kDcBalanced;
  if (s == "poisson_unbalanced") return InputMode::kPoissonUnbalanced;
  throw ConfigError("unknown input mode '" + std::string(text) + "'");
}

std::string_view to_string(InputMode mode) {
  switch (mode) {
    case InputMode::kPoissonBalanced: return "poisson_balanced";
    case InputMode::kDcBalanced: return "dc_balanced";
    case InputMode::kPoissonUnbalanced: return "poisson_unbalanced";
  }
  return "poisson_balanced";
}

ConnectionSpec ConnectivitySpec::rule(int post, int pre) const {
  return {pre,
          post,
          probability(post, pre),
          weight_mean_pa(post, pre),
          weight_rel_sd(post, pre),
          delay_mean_ms(post, pre),
          delay_rel_sd(post, pre)};
}

int ConnectivitySpec::active_rules() const { return static_cast<int>((probability.array() > 0.0).count()); }

CountVector ModelConfig::sizes() const {
  CountVector v;
  for (int i = 0; i < kNumPopulations; ++i) v(i) = populations[i].size;
  return v;
}

CountVector ModelConfig::ext_indegrees() const {
  CountVector v;
  for (int i = 0; i < kNumPopulations; ++i)
    v(i) = external.mode == InputMode::kPoissonUnbalanced ? populations[i].ext_indegree_unbalanced
                                                          : populations[i].ext_indegree_balanced;
  return v;
}

RealVector ModelConfig::full_scale_rates() const {
  RealVector v;
  for (int i = 0; i < kNumPopulations; ++i) v(i) = populations[i].full_scale_rate_hz;
  return v;
}

void validate(const ModelConfig& c, const ValidationOptions& options) {
  for (int i = 0; i < kNumPopulations; ++i) {
    const auto& p = c.populations[i];
    const std::string where = "populations[" + std::to_string(i) + "]";
    if (p.name != kPopulationNames[i])
      fail("populations must be ordered " + std::string(kPopulationNames[i]) + " at index " + std::to_string(i),
           where + ".name");
    if (p.size <= 0) fail("population size > 0", where + ".size");
    if (p.ext_indegree_balanced <= 0) fail("external in-degree > 0", where + ".ext_indegree_balanced");
    if (p.ext_indegree_unbalanced <= 0) fail("external in-degree > 0", where + ".ext_indegree_unbalanced");
    if (!(p.full_scale_rate_hz >= 0.0)) fail("full-scale rate >= 0", where + ".full_scale_rate_Hz");
    const auto [lo, hi] = p.depth_range_um;
    if (!(lo >= 0.0 && lo < hi && hi <= c.geometry.depth_um))
      fail("depth range ordered and inside [0, depth]", where + ".depth_range_um");
  }
  // Layers: e/i of one layer share a band; consecutive layers tile the column.
  for (int layer = 0; layer < kNumPopulations / 2; ++layer) {
    const auto& e = c.populations[2 * layer];
    const auto& i = c.populations[2 * layer + 1];
    const std::string where = "populations[" + std::to_string(2 * layer + 1) + "].depth_range_um";
    if (e.depth_range_um != i.depth_range_um) fail("e/i populations of a layer share one depth band", where);
    if (layer > 0 && c.populations[2 * layer - 1].depth_range_um[1] > e.depth_range_um[0])
      fail("layer depth bands disjoint and ordered", "populations[" + std::to_string(2 * layer) + "].depth_range_um");
  }
  if (options.require_canonical_total && c.total_neurons() != kCanonicalTotalNeurons)
    fail("sum of population sizes == " + std::to_string(kCanonicalTotalNeurons), "populations[].size");

  const auto& k = c.connectivity;
  for (int post = 0; post < kNumPopulations; ++post) {
    for (int pre = 0; pre < kNumPopulations; ++pre) {
      const std::string where = "connections[" + std::string(kPopulationNames[pre]) + "->" +
                                std::string(kPopulationNames[post]) + "]";
      const double p = k.probability(post, pre);
      if (!(p >= 0.0 && p < 1.0)) fail("probability in [0, 1)", where + ".probability");
      const double w = k.weight_mean_pa(post, pre);
      if (is_excitatory(pre) ? !(w > 0.0) : !(w < 0.0))
        fail(is_excitatory(pre) ? "excitatory weight > 0" : "inhibitory weight < 0", where + ".weight_mean_pA");
      if (!(k.weight_rel_sd(post, pre) >= 0.0)) fail("relative sd >= 0", where + ".weight_rel_sd");
      if (!(k.delay_mean_ms(post, pre) > 0.0)) fail("delay > 0", where + ".delay_mean_ms");
      if (!(k.delay_rel_sd(post, pre) >= 0.0)) fail("relative sd >= 0", where + ".delay_rel_sd");
    }
  }

  if (!(c.external.rate_per_input_hz > 0.0)) fail("external rate > 0", "external.rate_per_input_Hz");
  if (!(c.external.weight_pa > 0.0)) fail("external weight > 0", "external.weight_pA");

  const auto& n = c.neuron;
  if (!(n.tau_m_ms > 0.0)) fail("tau_m > 0", "neuron.tau_m_ms");
  if (!(n.tau_syn_ms > 0.0)) fail("tau_syn > 0", "neuron.tau_syn_ms");
  if (n.tau_m_ms == n.tau_syn_ms) fail("tau_m != tau_syn", "neuron.tau_syn_ms");
  if (!(n.c_m_pf > 0.0)) fail("C_m > 0", "neuron.C_m_pF");
  if (!(n.v_theta_mv > n.v_reset_mv)) fail("V_theta > V_reset", "neuron.V_theta_mV");
  if (!(n.t_ref_ms >= 0.0)) fail("t_ref >= 0", "neuron.t_ref_ms");
  if (!(n.v_init_sd_mv >= 0.0)) fail("V_init sd >= 0", "neuron.V_init_sd_mV");

  if (!(c.geometry.depth_um > 0.0)) fail("depth > 0", "geometry.depth_um");
  if (!(c.geometry.diameter_um > 0.0)) fail("diameter > 0", "geometry.diameter_um");

  const auto& e = c.experiment;
  if (!(e.dt_ms > 0.0)) fail("dt > 0", "experiment.dt_ms");
  if (!(e.transient_ms >= 0.0)) fail("transient >= 0", "experiment.transient_ms");
  if (!(e.duration_ms > e.transient_ms)) fail("duration > transient", "experiment.duration_ms");
}

ModelConfig canonical_config() {
  // Same values as data/pdcm_canonical.json.
  static constexpr std::array<std::int64_t, kNumPopulations> kSizes = {20683, 5834, 21915, 5479,
                                                                       4850,  1065, 14395, 2948};
  static constexpr std::array<std::int64_t, kNumPopulations> kExtBalanced = {1600, 1500, 2100, 1900,
                                                                             2000, 1900, 2900, 2100};
  static constexpr std::array<double, kNumPopulations> kRates = {0.90, 2.80, 4.39, 5.70, 6.79, 8.21, 1.14, 7.60};
  static constexpr std::array<std::array<double, 2>, 4> kLayerBands = {
      {{0.0, 396.9}, {396.9, 852.6}, {852.6, 1073.1}, {1073.1, 1470.0}}};
  static constexpr double kProbability[kNumPopulations][kNumPopulations] = {
      {0.1009, 0.1689, 0.0437, 0.0818, 0.0323, 0.0, 0.0076, 0.0},
      {0.1346, 0.1371, 0.0316, 0.0515, 0.0755, 0.0, 0.0042, 0.0},
      {0.0077, 0.0059, 0.0497, 0.1350, 0.0067, 0.0003, 0.0453, 0.0},
      {0.0691, 0.0029, 0.0794, 0.1597, 0.0033, 0.0, 0.1057, 0.0},
      {0.1004, 0.0622, 0.0505, 0.0057, 0.0831, 0.3726, 0.0204, 0.0},
      {0.0548, 0.0269, 0.0257, 0.0022, 0.0600, 0.3158, 0.0086, 0.0},
      {0.0156, 0.0066, 0.0211, 0.0166, 0.0572, 0.0197, 0.0396, 0.2252},
      {0.0364, 0.0010, 0.0034, 0.0005, 0.0277, 0.0080, 0.0658, 0.1443}};
  constexpr double kW = 87.8;  // pA
  constexpr double kG = -4.0;

  ModelConfig c;
  for (int i = 0; i < kNumPopulations; ++i) {
    c.populations[i] = {std::string(kPopulationNames[i]), kSizes[i], kExtBalanced[i], 2000, kRates[i],
                        kLayerBands[i / 2]};
  }
  auto& k = c.connectivity;
  for (int post = 0; post < kNumPopulations; ++post) {
    for (int pre = 0; pre < kNumPopulations; ++pre) {
      const bool exc = is_excitatory(pre);
      k.probability(post, pre) = kProbability[post][pre];
      k.weight_mean_pa(post, pre) = exc ? kW : kG * kW;
      k.weight_rel_sd(post, pre) = 0.1;
      k.delay_mean_ms(post, pre) = exc ? 1.5 : 0.75;
      k.delay_rel_sd(post, pre) = 0.5;
    }
  }
  k.weight_mean_pa(0, 2) = 2.0 * kW;  // L4e -> L2e
  c.external = {InputMode::kPoissonBalanced, 8.0, kW};
  return c;
}

ModelConfig config_from_json(const json& j, const ValidationOptions& options) {
  ModelConfig c;
  c.schema_version = optional<int>(j, "schema_version", 1, "$");
  if (c.schema_version != 1) fail("schema_version == 1", "schema_version");

  if (!j.contains("populations") || !j["populations"].is_array()) fail("populations array present", "populations");
  const auto& pops = j["populations"];
  if (pops.size() != kNumPopulations) fail("population count != 8", "populations");
  for (std::size_t i = 0; i < pops.size(); ++i) {
    const std::string where = "populations[" + std::to_string(i) + "]";
    auto& p = c.populations[i];
    p.name = require<std::string>(pops[i], "name", where);
    p.size = require<std::int64_t>(pops[i], "size", where);
    p.ext_indegree_balanced = require<std::int64_t>(pops[i], "ext_indegree_balanced", where);
    p.ext_indegree_unbalanced = require<std::int64_t>(pops[i], "ext_indegree_unbalanced", where);
    p.full_scale_rate_hz = require<double>(pops[i], "full_scale_rate_Hz", where);
    p.depth_range_um = require<std::array<double, 2>>(pops[i], "depth_range_um", where);
  }

  if (!j.contains("connections") || !j["connections"].is_array()) fail("connections array present", "connections");
  PopMatrix<int> seen = PopMatrix<int>::Zero();
  auto& k = c.connectivity;
  for (std::size_t r = 0; r < j["connections"].size(); ++r) {
    const auto& rule = j["connections"][r];
    const std::string where = "connections[" + std::to_string(r) + "]";
    const int pre = require_population(rule, "pre", where);
    const int post = require_population(rule, "post", where);
    if (seen(post, pre)++) fail("one rule per (pre, post) pair", where);
    k.probability(post, pre) = require<double>(rule, "probability", where);
    k.weight_mean_pa(post, pre) = require<double>(rule, "weight_mean_pA", where);
    k.weight_rel_sd(post, pre) = require<double>(rule, "weight_rel_sd", where);
    k.delay_mean_ms(post, pre) = require<double>(rule, "delay_mean_ms", where);
    k.delay_rel_sd(post, pre) = require<double>(rule, "delay_rel_sd", where);
  }
  if ((seen.array() == 0).any()) fail("connection matrix total over the 8x8 grid", "connections");

  if (!j.contains("external")) fail("missing required field", "external");
  const auto& ext = j["external"];
  try {
    c.external.mode = parse_input_mode(optional<std::string>(ext, "mode", "poisson_balanced", "external"));
  } catch (const ConfigError&) {
    fail("mode is one of poisson_balanced, dc_balanced, poisson_unbalanced", "external.mode");
  }
  c.external.rate_per_input_hz = require<double>(ext, "rate_per_input_Hz", "external");
  c.external.weight_pa = require<double>(ext, "weight_pA", "external");

  if (!j.contains("neuron")) fail("missing required field", "neuron");
  const auto& n = j["neuron"];
  c.neuron.tau_m_ms = require<double>(n, "tau_m_ms", "neuron");
  c.neuron.tau_syn_ms = require<double>(n, "tau_syn_ms", "neuron");
  c.neuron.c_m_pf = require<double>(n, "C_m_pF", "neuron");
  c.neuron.v_rest_mv = require<double>(n, "V_rest_mV", "neuron");
  c.neuron.v_reset_mv = require<double>(n, "V_reset_mV", "neuron");
  c.neuron.v_theta_mv = require<double>(n, "V_theta_mV", "neuron");
  c.neuron.t_ref_ms = require<double>(n, "t_ref_ms", "neuron");
  c.neuron.v_init_mean_mv = require<double>(n, "V_init_mean_mV", "neuron");
  c.neuron.v_init_sd_mv = require<double>(n, "V_init_sd_mV", "neuron");

  if (j.contains("geometry")) {
    c.geometry.depth_um = require<double>(j["geometry"], "depth_um", "geometry");
    c.geometry.diameter_um = require<double>(j["geometry"], "diameter_um", "geometry");
  }

  const json exp = j.value("experiment", json::object());
  const ExperimentSpec defaults;
  c.experiment.dt_ms = optional<double>(exp, "dt_ms", defaults.dt_ms, "experiment");
  c.experiment.duration_ms = optional<double>(exp, "duration_ms", defaults.duration_ms, "experiment");
  c.experiment.transient_ms = optional<double>(exp, "transient_ms", defaults.transient_ms, "experiment");
  c.experiment.seed = optional<std::uint64_t>(exp, "seed", defaults.seed, "experiment");

  validate(c, options);
  return c;
}

json to_json(const ModelConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  const auto& n = c.neuron;
  j["neuron"] = {{"tau_m_ms", n.tau_m_ms},         {"tau_syn_ms", n.tau_syn_ms},
                 {"C_m_pF", n.c_m_pf},             {"V_rest_mV", n.v_rest_mv},
                 {"V_reset_mV", n.v_reset_mv},     {"V_theta_mV", n.v_theta_mv},
                 {"t_ref_ms", n.t_ref_ms},         {"V_init_mean_mV", n.v_init_mean_mv},
                 {"V_init_sd_mV", n.v_init_sd_mv}};
  j["external"] = {{"mode", to_string(c.external.mode)},
                   {"rate_per_input_Hz", c.external.rate_per_input_hz},
                   {"weight_pA", c.external.weight_pa}};
  j["geometry"] = {{"depth_um", c.geometry.depth_um}, {"diameter_um", c.geometry.diameter_um}};
  j["experiment"] = {{"dt_ms", c.experiment.dt_ms},
                     {"duration_ms", c.experiment.duration_ms},
                     {"transient_ms", c.experiment.transient_ms},
                     {"seed", c.experiment.seed}};
  j["populations"] = json::array();
  for (const auto& p : c.populations) {
    j["populations"].push_back({{"name", p.name},
                                {"size", p.size},
                                {"ext_indegree_balanced", p.ext_indegree_balanced},
                                {"ext_indegree_unbalanced", p.ext_indegree_unbalanced},
                                {"full_scale_rate_Hz", p.full_scale_rate_hz},
                                {"depth_range_um", p.depth_range_um}});
  }
  j["connections"] = json::array();
  for (int post = 0; post < kNumPopulations; ++post) {
    for (int pre = 0; pre < kNumPopulations; ++pre) {
      const auto r = c.connectivity.rule(post, pre);
      j["connections"].push_back({{"pre", kPopulationNames[pre]},
                                  {"post", kPopulationNames[post]},
                                  {"probability", r.probability},
                                  {"weight_mean_pA", r.weight_mean_pa},
                                  {"weight_rel_sd", r.weight_rel_sd},
                                  {"delay_mean_ms", r.delay_mean_ms},
                                  {"delay_rel_sd", r.delay_rel_sd}});
    }
  }
  return j;
}

ModelConfig parse_config(std::string_view text, const ValidationOptions& options) {
  json j;
  try {
    j = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config parse error: top level must be an object");
  return config_from_json(j, options);
}

ModelConfig load_config(const std::filesystem::path& path, const ValidationOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), options);
}

void save_config(const ModelConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_json(config).dump(2) << '\n';
}

}  // namespace microcircuit
