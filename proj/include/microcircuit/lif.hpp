#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "microcircuit/config.hpp"
#include "microcircuit/random.hpp"

namespace microcircuit {

/// Exact propagators of the current-based LIF neuron with one exponential
/// synaptic current:
///   tau_m dV/dt = -(V - V_rest) + (I_syn + I_dc) tau_m / C_m
///   tau_syn dI_syn/dt = -I_syn
/// over one step of length dt.
template <typename Scalar>
struct LifPropagator {
  Scalar syn_decay{};   ///< exp(-dt / tau_syn)
  Scalar mem_decay{};   ///< exp(-dt / tau_m)
  Scalar syn_to_mem{};  ///< mV per pA of I_syn at the start of the step
  Scalar dc_to_mem{};   ///< mV per pA of constant current
  std::int64_t refractory_steps = 0;

  static LifPropagator make(const NeuronModelSpec& n, Scalar dt_ms) {
    using std::exp;
    using std::expm1;
    using std::llround;
    if (n.tau_m_ms == n.tau_syn_ms) throw std::invalid_argument("LIF propagator requires tau_m != tau_syn");
    if (!(dt_ms > Scalar(0))) throw std::invalid_argument("dt must be > 0");
    const Scalar tau_m(n.tau_m_ms), tau_s(n.tau_syn_ms), c_m(n.c_m_pf);
    LifPropagator p;
    p.syn_decay = exp(-dt_ms / tau_s);
    p.mem_decay = exp(-dt_ms / tau_m);
    // tau_m tau_s / (C (tau_s - tau_m)) * (e^{-dt/tau_s} - e^{-dt/tau_m}); pA*ms/pF = mV.
    p.syn_to_mem = tau_m * tau_s / (c_m * (tau_s - tau_m)) * (expm1(-dt_ms / tau_s) - expm1(-dt_ms / tau_m));
    p.dc_to_mem = -tau_m / c_m * expm1(-dt_ms / tau_m);
    p.refractory_steps = llround(n.t_ref_ms / static_cast<double>(dt_ms));
    return p;
  }
};

template <typename Scalar>
struct NeuronState {
  Scalar v_mv{};
  Scalar i_syn_pa{};
  std::int64_t refractory_remaining = 0;
  Scalar dc_pa{};
};

/// Advances one neuron by one step. `input_pa` (synaptic jumps arriving this
/// step) enters I_syn after the membrane update, so it first moves V on the
/// following step. Returns true if the neuron spiked.
template <typename Scalar>
bool step(NeuronState<Scalar>& s, const LifPropagator<Scalar>& p, const NeuronModelSpec& n, Scalar input_pa = Scalar(0)) {
  const Scalar v_rest(n.v_rest_mv);
  bool spiked = false;
  if (s.refractory_remaining > 0) {
    s.v_mv = Scalar(n.v_reset_mv);
    --s.refractory_remaining;
  } else {
    s.v_mv = v_rest + (s.v_mv - v_rest) * p.mem_decay + s.i_syn_pa * p.syn_to_mem + s.dc_pa * p.dc_to_mem;
  }
  s.i_syn_pa = s.i_syn_pa * p.syn_decay + input_pa;
  if (s.refractory_remaining == 0 && s.v_mv >= Scalar(n.v_theta_mv)) {
    s.v_mv = Scalar(n.v_reset_mv);
    s.refractory_remaining = p.refractory_steps;
    spiked = true;
  }
  return spiked;
}

/// Initial potentials ~ N(V_init_mean, V_init_sd), unclipped. Neuron i draws
/// from stream first_id + i.
Eigen::VectorXd init_membrane(const NeuronModelSpec& n, std::size_t count, const random::Key& key,
                              std::uint64_t first_id = 0);

/// Superposition of `indegree` independent Poisson trains at `rate_hz`, each
/// spike adding `weight_pa` to I_syn.
struct PoissonDrive {
  double mean_count = 0.0;  ///< indegree * rate * dt
  double exp_neg_mean = 1.0;
  double weight_pa = 0.0;

  PoissonDrive() = default;
  PoissonDrive(std::int64_t indegree, double rate_hz, double weight_pa, double dt_ms)
      : mean_count(static_cast<double>(indegree) * rate_hz * dt_ms * 1e-3),
        exp_neg_mean(std::exp(-mean_count)),
        weight_pa(weight_pa) {}

  std::uint64_t sample_count(random::CounterRng& rng) const {
    if (mean_count <= 0.0) return 0;
    if (mean_count < 30.0) return random::poisson_inversion(rng.uniform(), mean_count, exp_neg_mean);
    return rng.poisson(mean_count);
  }
  /// pA added to I_syn this step.
  double increment(random::CounterRng& rng) const { return weight_pa * static_cast<double>(sample_count(rng)); }
};

/// Mean current of the Poisson drive: indegree * rate * weight * tau_syn.
inline double dc_drive_equivalent(std::int64_t indegree, double rate_hz, double weight_pa, double tau_syn_ms) {
  return static_cast<double>(indegree) * rate_hz * weight_pa * tau_syn_ms * 1e-3;
}

}  // namespace microcircuit
