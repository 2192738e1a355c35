#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/matrix.hpp"
#include "spikenet/neuron.hpp"
#include "spikenet/rng.hpp"
#include "spikenet/sampler.hpp"
#include "spikenet/tgraph.hpp"

namespace spikenet {

enum class PoolMode { sum, avg, linear };

inline std::string to_string(PoolMode m) {
  switch (m) {
    case PoolMode::sum: return "sum";
    case PoolMode::avg: return "avg";
    case PoolMode::linear: return "linear";
  }
  return "?";
}

inline PoolMode parse_pool_mode(const std::string& s) {
  if (s == "sum") return PoolMode::sum;
  if (s == "avg") return PoolMode::avg;
  if (s == "linear") return PoolMode::linear;
  throw InputError("unknown pooling mode '" + s + "' (expected sum|avg|linear)");
}

struct ModelConfig {
  std::size_t in_dim = 0;
  std::vector<std::size_t> hidden{128, 128};  // one LIF layer per entry
  std::size_t embed_dim = 128;                // output width of linear pooling
  std::size_t num_classes = 0;
  std::size_t num_steps = 0;
  PoolMode pool = PoolMode::linear;
  std::vector<LifParams> lif;  // per layer; empty means defaults everywhere
  FireMode fire = FireMode::hard;
  bool detach_threshold = true;

  std::size_t num_layers() const { return hidden.size(); }
  std::size_t layer_in(std::size_t k) const { return k == 0 ? in_dim : hidden[k - 1]; }
  std::size_t layer_out(std::size_t k) const { return hidden[k]; }
  std::size_t last_dim() const { return hidden.empty() ? 0 : hidden.back(); }
  std::size_t embedding_dim() const { return pool == PoolMode::linear ? embed_dim : last_dim(); }

  const LifParams& lif_for(std::size_t k) const {
    static const LifParams defaults{};
    if (lif.empty()) return defaults;
    return lif.size() == 1 ? lif.front() : lif.at(k);
  }

  void validate() const {
    if (hidden.empty()) throw InputError("model: at least one layer required");
    for (auto h : hidden)
      if (h == 0) throw InputError("model: hidden dims must be positive");
    if (in_dim == 0) throw InputError("model: feature dimension is zero");
    if (num_steps == 0) throw InputError("model: num_steps is zero");
    if (num_classes < 2) throw InputError("model: need at least two classes");
    if (pool == PoolMode::linear && embed_dim == 0) throw InputError("model: embed_dim is zero");
    if (!lif.empty() && lif.size() != 1 && lif.size() != hidden.size())
      throw InputError("model: give one LIF parameter set or one per layer");
    for (std::size_t k = 0; k < num_layers(); ++k) lif_for(k).validate();
  }
};

// Weights per layer, the pooling transform (linear pooling only) and the
// classifier head.
template <class T>
struct ModelParams {
  std::vector<Matrix<T>> layers;  // layer k: layer_in(k) x layer_out(k)
  Matrix<T> pool;                 // (num_steps * last_dim) x embed_dim, or empty
  Matrix<T> head;                 // embedding_dim x num_classes
  Matrix<T> head_bias;            // 1 x num_classes

  static ModelParams zeros(const ModelConfig& cfg) {
    ModelParams p;
    for (std::size_t k = 0; k < cfg.num_layers(); ++k)
      p.layers.emplace_back(cfg.layer_in(k), cfg.layer_out(k));
    if (cfg.pool == PoolMode::linear) p.pool = Matrix<T>(cfg.num_steps * cfg.last_dim(), cfg.embed_dim);
    p.head = Matrix<T>(cfg.embedding_dim(), cfg.num_classes);
    p.head_bias = Matrix<T>(1, cfg.num_classes);
    return p;
  }

  // Uniform in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed) {
    ModelParams p = zeros(cfg);
    SplitMix64 rng(derive_seed(seed, Stream::init));
    auto fill = [&rng](Matrix<T>& m) {
      if (m.empty()) return;
      const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (auto& v : m.values()) v = static_cast<T>(u(rng));
    };
    for (auto& w : p.layers) fill(w);
    fill(p.pool);
    fill(p.head);
    return p;
  }

  struct TensorRef {
    std::string name;
    Matrix<T>* tensor;
    int rank;
  };

  // Canonical tensor order (also the checkpoint order).
  std::vector<TensorRef> tensors() {
    std::vector<TensorRef> out;
    for (std::size_t k = 0; k < layers.size(); ++k)
      out.push_back({"layer" + std::to_string(k + 1), &layers[k], 2});
    if (!pool.empty()) out.push_back({"pool", &pool, 2});
    out.push_back({"head", &head, 2});
    out.push_back({"head_bias", &head_bias, 1});
    return out;
  }

  template <class U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    for (const auto& w : layers) out.layers.push_back(w.template cast<U>());
    out.pool = pool.template cast<U>();
    out.head = head.template cast<U>();
    out.head_bias = head_bias.template cast<U>();
    return out;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

template <class T>
std::size_t param_count(const ModelParams<T>& p) {
  std::size_t n = p.pool.size() + p.head.size() + p.head_bias.size();
  for (const auto& w : p.layers) n += w.size();
  return n;
}

// Last-layer spikes of each root at every step: (roots, steps, dim).
template <class T>
class SpikeHistory {
 public:
  SpikeHistory() = default;
  SpikeHistory(std::size_t roots, std::size_t steps, std::size_t dim)
      : roots_(roots), steps_(steps), dim_(dim), data_(roots * steps * dim) {}

  std::size_t num_roots() const { return roots_; }
  std::size_t num_steps() const { return steps_; }
  std::size_t dim() const { return dim_; }

  std::span<T> at(std::size_t root, std::size_t step) {
    return {data_.data() + (root * steps_ + step) * dim_, dim_};
  }
  std::span<const T> at(std::size_t root, std::size_t step) const {
    return {data_.data() + (root * steps_ + step) * dim_, dim_};
  }
  // All steps of one root back to back, i.e. the concatenation used by linear pooling.
  std::span<const T> concat(std::size_t root) const {
    return {data_.data() + root * steps_ * dim_, steps_ * dim_};
  }
  std::span<const T> values() const { return data_; }

 private:
  std::size_t roots_ = 0;
  std::size_t steps_ = 0;
  std::size_t dim_ = 0;
  std::vector<T> data_;
};

// Spike counts of the LIF outputs seen by a forward pass, per step.
struct FiringStats {
  std::vector<double> spikes;  // per step
  std::vector<double> slots;   // neurons evaluated per step

  void add(std::size_t step, double s, double n) {
    if (spikes.size() <= step) {
      spikes.resize(step + 1, 0.0);
      slots.resize(step + 1, 0.0);
    }
    spikes[step] += s;
    slots[step] += n;
  }

  void merge(const FiringStats& o) {
    for (std::size_t t = 0; t < o.spikes.size(); ++t) add(t, o.spikes[t], o.slots[t]);
  }

  double rate() const {
    double s = 0, n = 0;
    for (std::size_t t = 0; t < spikes.size(); ++t) {
      s += spikes[t];
      n += slots[t];
    }
    return n > 0 ? s / n : 0.0;
  }
};

// What the backward pass needs from one forward pass. Spikes and layer
// inputs are recomputed from the stored pre-activations, and layer-1 inputs
// are re-read from the graph's features.
template <class T>
struct ForwardTape {
  const TemporalGraph* graph = nullptr;
  const SampleTree* tree = nullptr;
  // [step][layer][depth]: V - V_th(prev) and the pre-reset potential, one row
  // per tree slot at that depth.
  std::vector<std::vector<std::vector<Matrix<T>>>> pre_activation;
  std::vector<std::vector<std::vector<Matrix<T>>>> potential;
  SpikeHistory<T> history;
  Matrix<T> embedding;
  Matrix<T> probs;
  std::vector<std::int32_t> targets;
  T loss_scale{1};
  bool recorded = false;
  bool replayed = false;
};

namespace detail {

template <class T>
void gather_features(const TemporalGraph& tg, std::size_t step, std::span<const NodeId> nodes,
                     Matrix<T>& out) {
  out = Matrix<T>(nodes.size(), tg.features().dim());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    auto src = tg.features().row(step, nodes[j]);
    auto dst = out.row(j);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = static_cast<T>(src[c]);
  }
}

inline bool uses_masked_sum(const ModelConfig& cfg, std::size_t layer) {
  return layer > 0 && cfg.fire == FireMode::hard;
}

template <class T>
void transform_rows(const Matrix<T>& in, const Matrix<T>& w, bool masked, Matrix<T>& out) {
  out = Matrix<T>(in.rows(), w.cols());
  for (std::size_t j = 0; j < in.rows(); ++j) {
    if (masked)
      masked_sum<T>(in.row(j), w, out.row(j));
    else
      dense_affine<T>(in.row(j), w, out.row(j));
  }
}

inline void check_forward_shapes(const TemporalGraph& tg, const SampleTree& tree,
                                 const ModelConfig& cfg) {
  if (tree.depth() != cfg.num_layers())
    throw std::invalid_argument("forward: tree depth " + std::to_string(tree.depth()) +
                                " != model layers " + std::to_string(cfg.num_layers()));
  if (tree.num_steps() != tg.num_steps() || cfg.num_steps != tg.num_steps())
    throw std::invalid_argument("forward: step count mismatch between graph, tree and model");
  if (tg.features().dim() != cfg.in_dim)
    throw std::invalid_argument("forward: feature dim " + std::to_string(tg.features().dim()) +
                                " != model input dim " + std::to_string(cfg.in_dim));
}

}  // namespace detail

/// Spiking forward pass over a sampled batch tree. For every step and layer k
/// the layer-(k-1) representation of every tree slot is transformed by W_k
/// (dense for analog features, masked summation for spikes), each parent
/// averages its own message with its children's block, and the result drives
/// the LIF neurons of that (layer, depth) slot. LIF state persists across
/// steps. Returns the last layer's spikes at the roots.
template <class T>
SpikeHistory<T> forward_batch(const TemporalGraph& tg, const SampleTree& tree,
                              const ModelConfig& cfg, const ModelParams<T>& params,
                              ForwardTape<T>* tape = nullptr, FiringStats* stats = nullptr) {
  detail::check_forward_shapes(tg, tree, cfg);
  if (params.layers.size() != cfg.num_layers())
    throw std::invalid_argument("forward: parameter layer count mismatch");
  for (std::size_t k = 0; k < cfg.num_layers(); ++k)
    if (params.layers[k].rows() != cfg.layer_in(k) || params.layers[k].cols() != cfg.layer_out(k))
      throw std::invalid_argument("forward: layer " + std::to_string(k + 1) + " weight shape mismatch");

  const std::size_t K = cfg.num_layers();
  const std::size_t steps = tg.num_steps();
  const std::size_t roots = tree.num_roots();

  // Layer k (0-based) produces outputs at depths 0 .. K-1-k.
  std::vector<std::vector<LifState<T>>> states(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t d = 0; d + k < K; ++d)
      states[k].emplace_back(tree.layer_size(d) * cfg.layer_out(k), cfg.lif_for(k));

  SpikeHistory<T> history(roots, steps, cfg.last_dim());
  if (tape) {
    tape->graph = &tg;
    tape->tree = &tree;
    tape->pre_activation.assign(steps, std::vector<std::vector<Matrix<T>>>(K));
    tape->potential.assign(steps, std::vector<std::vector<Matrix<T>>>(K));
    tape->recorded = false;
    tape->replayed = false;
  }

  std::vector<Matrix<T>> h;
  std::vector<Matrix<T>> msg;
  std::vector<Matrix<T>> next;
  Matrix<T> agg;
  for (std::size_t t = 0; t < steps; ++t) {
    h.assign(K + 1, {});
    for (std::size_t d = 0; d <= K; ++d) detail::gather_features(tg, t, tree.layer(t, d), h[d]);

    for (std::size_t k = 0; k < K; ++k) {
      const auto& w = params.layers[k];
      const bool masked = detail::uses_masked_sum(cfg, k);
      const std::size_t out_dim = cfg.layer_out(k);
      const std::size_t in_depths = K - k + 1;
      msg.assign(in_depths, {});
      for (std::size_t d = 0; d < in_depths; ++d) detail::transform_rows(h[d], w, masked, msg[d]);

      next.assign(in_depths - 1, {});
      for (std::size_t d = 0; d + 1 < in_depths; ++d) {
        const std::size_t f = tree.fanouts()[d];
        const std::size_t n = tree.layer_size(d);
        agg = Matrix<T>(n, out_dim);
        for (std::size_t j = 0; j < n; ++j)
          aggregate_mean<T>(msg[d].row(j), msg[d + 1].rows_span(j * f, f), f, agg.row(j));
        next[d] = Matrix<T>(n, out_dim);
        std::span<T> pre;
        std::span<T> pot;
        if (tape) {
          tape->pre_activation[t][k].emplace_back(n, out_dim);
          tape->potential[t][k].emplace_back(n, out_dim);
          pre = tape->pre_activation[t][k].back().values();
          pot = tape->potential[t][k].back().values();
        }
        lif_step<T>(states[k][d], agg.values(), cfg.lif_for(k), next[d].values(), cfg.fire, pre, pot);
        if (stats) {
          double s = 0;
          for (T v : next[d].values()) s += static_cast<double>(v);
          stats->add(t, s, static_cast<double>(next[d].size()));
        }
      }
      h = std::move(next);
    }
    for (std::size_t b = 0; b < roots; ++b) {
      auto src = h[0].row(b);
      std::copy(src.begin(), src.end(), history.at(b, t).begin());
    }
  }
  if (tape) {
    tape->history = history;
    tape->recorded = true;
  }
  return history;
}

/// Compresses each root's spike history into an embedding: sum or average
/// over steps, or the step-ordered concatenation times `pool_weights`.
template <class T>
Matrix<T> spike_pool(const SpikeHistory<T>& history, PoolMode mode, const Matrix<T>& pool_weights,
                     FireMode fire = FireMode::hard) {
  const std::size_t roots = history.num_roots();
  const std::size_t steps = history.num_steps();
  if (mode == PoolMode::linear) {
    if (pool_weights.rows() != steps * history.dim())
      throw std::invalid_argument("spike_pool: pooling weights expect " +
                                  std::to_string(pool_weights.rows()) + " inputs, history has " +
                                  std::to_string(steps * history.dim()));
    Matrix<T> z(roots, pool_weights.cols());
    for (std::size_t b = 0; b < roots; ++b) {
      if (fire == FireMode::hard)
        masked_sum<T>(history.concat(b), pool_weights, z.row(b));
      else
        dense_affine<T>(history.concat(b), pool_weights, z.row(b));
    }
    return z;
  }
  Matrix<T> z(roots, history.dim());
  for (std::size_t b = 0; b < roots; ++b) {
    auto out = z.row(b);
    for (std::size_t t = 0; t < steps; ++t) {
      auto s = history.at(b, t);
      for (std::size_t j = 0; j < s.size(); ++j) out[j] += s[j];
    }
    if (mode == PoolMode::avg)
      for (auto& v : out) v /= static_cast<T>(steps);
  }
  return z;
}

template <class T>
void softmax_inplace(std::span<T> logits) {
  const T mx = *std::max_element(logits.begin(), logits.end());
  T sum{};
  for (auto& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : logits) v /= sum;
}

/// Row-wise softmax(z * head + bias).
template <class T>
Matrix<T> classify(const Matrix<T>& embedding, const Matrix<T>& head, const Matrix<T>& bias) {
  if (embedding.cols() != head.rows() || bias.cols() != head.cols())
    throw std::invalid_argument("classify: shape mismatch");
  Matrix<T> probs(embedding.rows(), head.cols());
  for (std::size_t b = 0; b < embedding.rows(); ++b) {
    auto out = probs.row(b);
    dense_affine<T>(embedding.row(b), head, out);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += bias(0, c);
    softmax_inplace(out);
  }
  return probs;
}

template <class T>
std::vector<T> classify(std::span<const T> embedding, const Matrix<T>& head, const Matrix<T>& bias) {
  Matrix<T> z(1, embedding.size());
  std::copy(embedding.begin(), embedding.end(), z.row(0).begin());
  auto probs = classify(z, head, bias);
  return {probs.values().begin(), probs.values().end()};
}

/// Inference: forward, pool and classify a sampled batch.
template <class T>
Matrix<T> predict_batch(const TemporalGraph& tg, const SampleTree& tree, const ModelConfig& cfg,
                        const ModelParams<T>& params, FiringStats* stats = nullptr) {
  auto history = forward_batch(tg, tree, cfg, params, static_cast<ForwardTape<T>*>(nullptr), stats);
  auto z = spike_pool(history, cfg.pool, params.pool, cfg.fire);
  return classify(z, params.head, params.head_bias);
}

}  // namespace spikenet
