#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "spikenet/error.hpp"

namespace spikenet {

// Constants of one LIF layer.
struct LifParams {
  double tau_m = 1.0;    // membrane time constant, >= 1
  double v_reset = 0.0;  // reset potential, < v_th0
  double v_th0 = 1.0;    // initial firing threshold
  double tau_th = 0.7;   // threshold decay, (0, 1]
  double gamma = 0.2;    // threshold increment per spike, >= 0
  double alpha = 1.0;    // surrogate smoothness, > 0

  void validate() const {
    if (!(tau_m >= 1.0)) throw InputError("lif: tau_m must be >= 1");
    if (!(v_reset < v_th0)) throw InputError("lif: v_reset must be < v_th0");
    if (!(tau_th > 0.0 && tau_th <= 1.0)) throw InputError("lif: tau_th must lie in (0, 1]");
    if (!(gamma >= 0.0)) throw InputError("lif: gamma must be >= 0");
    if (!(alpha > 0.0)) throw InputError("lif: alpha must be > 0");
  }
};

// hard: Heaviside firing with the surrogate derivative in the backward pass.
// relaxed: sigmoid(alpha * x) in the forward pass too, which makes the whole
// network differentiable (used to check gradients against finite differences).
enum class FireMode { hard, relaxed };

template <class T>
T lif_integrate(T v_prev, T input, const LifParams& p) {
  const T tau = static_cast<T>(p.tau_m);
  return v_prev + (-(v_prev - static_cast<T>(p.v_reset)) + input) / tau;
}

// Heaviside with Theta(0) = 1.
template <class T>
T lif_fire(T v, T v_th_prev) {
  return v - v_th_prev >= T{0} ? T{1} : T{0};
}

template <class T>
T lif_reset(T v, T spike, T v_reset) {
  return spike * v_reset + (T{1} - spike) * v;
}

template <class T>
T threshold_update(T v_th_prev, T spike, T tau_th, T gamma) {
  return tau_th * v_th_prev + gamma * spike;
}

template <class T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <class T>
T relaxed_fire(T x, T alpha) {
  return sigmoid(alpha * x);
}

// Derivative of relaxed_fire with respect to x.
template <class T>
T surrogate_grad(T x, T alpha) {
  // sigma(z) * sigma(-z) keeps precision in both tails, unlike s * (1 - s).
  return alpha * sigmoid(alpha * x) * sigmoid(-alpha * x);
}

// Per-neuron membrane potential and adaptive threshold.
template <class T>
struct LifState {
  std::vector<T> v;
  std::vector<T> v_th;

  LifState() = default;
  LifState(std::size_t n, const LifParams& p)
      : v(n, static_cast<T>(p.v_reset)), v_th(n, static_cast<T>(p.v_th0)) {}

  std::size_t size() const { return v.size(); }
};

/// One time step for every neuron: integrate, fire against the previous
/// threshold, reset, then update the threshold. Writes spikes to `spikes`;
/// when given, `pre_activation` receives V - V_th(prev) and `potential` the
/// pre-reset potential (what the backward pass needs).
template <class T>
void lif_step(LifState<T>& state, std::span<const T> input, const LifParams& p,
              std::span<T> spikes, FireMode mode = FireMode::hard,
              std::span<T> pre_activation = {}, std::span<T> potential = {}) {
  const std::size_t n = state.size();
  if (input.size() != n || spikes.size() != n)
    throw std::invalid_argument("lif_step: input/spike length != neuron count");
  const T v_reset = static_cast<T>(p.v_reset);
  const T tau_th = static_cast<T>(p.tau_th);
  const T gamma = static_cast<T>(p.gamma);
  const T alpha = static_cast<T>(p.alpha);
  for (std::size_t i = 0; i < n; ++i) {
    const T v = lif_integrate(state.v[i], input[i], p);
    const T x = v - state.v_th[i];
    const T o = mode == FireMode::hard ? lif_fire(v, state.v_th[i]) : relaxed_fire(x, alpha);
    if (!pre_activation.empty()) pre_activation[i] = x;
    if (!potential.empty()) potential[i] = v;
    state.v[i] = lif_reset(v, o, v_reset);
    state.v_th[i] = threshold_update(state.v_th[i], o, tau_th, gamma);
    spikes[i] = o;
  }
}

template <class T>
std::vector<T> lif_step(LifState<T>& state, std::span<const T> input, const LifParams& p,
                        FireMode mode = FireMode::hard) {
  std::vector<T> spikes(state.size());
  lif_step<T>(state, input, p, spikes, mode);
  return spikes;
}

// Gradient carried backwards from step t+1 into step t for one neuron: with
// respect to the post-reset potential and (unless detached) the threshold.
template <class T>
struct LifCarry {
  T v_post{};
  T v_th{};
};

/// Backward through one LIF step of one neuron. `grad_spike` is the gradient
/// arriving at the emitted spike from later layers/pooling. The spike enters
/// through the surrogate derivative, both directly and via the reset; the
/// (1 - O) reset factor uses the emitted spike value. Returns the gradient
/// with respect to the step's synaptic input and updates `carry` to refer to
/// step t-1.
template <class T>
T lif_step_backward(T pre_activation, T potential, T grad_spike, const LifParams& p, FireMode mode,
                    bool detach_threshold, LifCarry<T>& carry) {
  const T alpha = static_cast<T>(p.alpha);
  const T inv_tau = T{1} / static_cast<T>(p.tau_m);
  const T spike = mode == FireMode::hard ? (pre_activation >= T{0} ? T{1} : T{0})
                                         : relaxed_fire(pre_activation, alpha);
  T grad_o = grad_spike + carry.v_post * (static_cast<T>(p.v_reset) - potential);
  if (!detach_threshold) grad_o += static_cast<T>(p.gamma) * carry.v_th;
  const T grad_x = grad_o * surrogate_grad(pre_activation, alpha);
  const T grad_v = carry.v_post * (T{1} - spike) + grad_x;
  carry.v_post = grad_v * (T{1} - inv_tau);
  carry.v_th = detach_threshold ? T{0} : static_cast<T>(p.tau_th) * carry.v_th - grad_x;
  return grad_v * inv_tau;
}

}  // namespace spikenet
