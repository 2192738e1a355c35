#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/matrix.hpp"
#include "spikenet/net.hpp"
#include "spikenet/neuron.hpp"
#include "spikenet/rng.hpp"
#include "spikenet/sampler.hpp"
#include "spikenet/tgraph.hpp"

namespace spikenet {

inline constexpr double kProbFloor = 1e-12;

template <class T>
T cross_entropy(std::span<const T> probs, std::size_t label) {
  if (label >= probs.size()) throw std::out_of_range("cross_entropy: label out of range");
  return -std::log(std::max(probs[label], static_cast<T>(kProbFloor)));
}

/// Forward pass recorded on `tape`, followed by pooling, softmax and the
/// summed cross-entropy of the roots scaled by `loss_scale`.
template <class T>
T forward_loss(const TemporalGraph& tg, const SampleTree& tree, const ModelConfig& cfg,
               const ModelParams<T>& params, std::span<const std::int32_t> targets,
               ForwardTape<T>& tape, T loss_scale = T{1}, FiringStats* stats = nullptr) {
  if (targets.size() != tree.num_roots())
    throw std::invalid_argument("forward_loss: one target per root required");
  forward_batch(tg, tree, cfg, params, &tape, stats);
  tape.embedding = spike_pool(tape.history, cfg.pool, params.pool, cfg.fire);
  tape.probs = classify(tape.embedding, params.head, params.head_bias);
  tape.targets.assign(targets.begin(), targets.end());
  tape.loss_scale = loss_scale;
  T loss{};
  for (std::size_t b = 0; b < targets.size(); ++b)
    loss += cross_entropy<T>(tape.probs.row(b), static_cast<std::size_t>(targets[b]));
  return loss * loss_scale;
}

namespace detail {

template <class T>
void spikes_from_tape(const Matrix<T>& pre, const LifParams& p, FireMode fire, Matrix<T>& out) {
  out = Matrix<T>(pre.rows(), pre.cols());
  auto src = pre.values();
  auto dst = out.values();
  const T alpha = static_cast<T>(p.alpha);
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = fire == FireMode::hard ? (src[i] >= T{0} ? T{1} : T{0}) : relaxed_fire(src[i], alpha);
}

}  // namespace detail

/// Reverse replay of a recorded forward_loss. Accumulates parameter gradients
/// into `grads` (which must have the shape of `params`). Gradients flow back
/// through time along the membrane recurrence (leak and reset paths); at each
/// firing decision the upstream gradient is multiplied by the surrogate
/// derivative. The threshold recurrence is skipped when cfg.detach_threshold.
template <class T>
void backward(ForwardTape<T>& tape, const ModelConfig& cfg, const ModelParams<T>& params,
              ModelParams<T>& grads) {
  if (!tape.recorded) throw std::logic_error("backward: no recorded forward pass");
  if (tape.replayed) throw std::logic_error("backward: tape already replayed");
  if (tape.probs.rows() != tape.targets.size())
    throw std::logic_error("backward: tape has no loss (use forward_loss)");
  tape.replayed = true;

  const TemporalGraph& tg = *tape.graph;
  const SampleTree& tree = *tape.tree;
  const std::size_t K = cfg.num_layers();
  const std::size_t steps = tg.num_steps();
  const std::size_t roots = tree.num_roots();
  const std::size_t classes = params.head.cols();

  // Softmax + cross-entropy.
  Matrix<T> g_logits(roots, classes);
  for (std::size_t b = 0; b < roots; ++b) {
    auto p = tape.probs.row(b);
    auto g = g_logits.row(b);
    for (std::size_t c = 0; c < classes; ++c) g[c] = p[c] * tape.loss_scale;
    g[static_cast<std::size_t>(tape.targets[b])] -= tape.loss_scale;
  }

  // Classifier head.
  Matrix<T> g_embed(roots, params.head.rows());
  for (std::size_t b = 0; b < roots; ++b) {
    accumulate_weight_grad<T>(tape.embedding.row(b), g_logits.row(b), grads.head);
    for (std::size_t c = 0; c < classes; ++c) grads.head_bias(0, c) += g_logits(b, c);
    accumulate_input_grad<T>(g_logits.row(b), params.head, g_embed.row(b));
  }

  // Pooling -> gradient at every root's last-layer spikes, laid out like the history.
  const std::size_t dk = cfg.last_dim();
  std::vector<T> g_hist(roots * steps * dk, T{});
  for (std::size_t b = 0; b < roots; ++b) {
    std::span<T> gh(g_hist.data() + b * steps * dk, steps * dk);
    if (cfg.pool == PoolMode::linear) {
      if (cfg.fire == FireMode::hard)
        masked_sum_backward_weights<T>(tape.history.concat(b), g_embed.row(b), grads.pool);
      else
        accumulate_weight_grad<T>(tape.history.concat(b), g_embed.row(b), grads.pool);
      accumulate_input_grad<T>(g_embed.row(b), params.pool, gh);
    } else {
      const T scale = cfg.pool == PoolMode::avg ? T{1} / static_cast<T>(steps) : T{1};
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t j = 0; j < dk; ++j) gh[t * dk + j] = g_embed(b, j) * scale;
    }
  }

  // Carries per (layer, depth, neuron), persisting from step t+1 to t.
  std::vector<std::vector<std::vector<LifCarry<T>>>> carry(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t d = 0; d + k < K; ++d)
      carry[k].emplace_back(tree.layer_size(d) * cfg.layer_out(k));

  std::vector<std::vector<Matrix<T>>> g_out(K);  // [layer][depth] grad wrt emitted spikes
  std::vector<Matrix<T>> g_msg;
  Matrix<T> input;
  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t k = 0; k < K; ++k) {
      g_out[k].clear();
      for (std::size_t d = 0; d + k < K; ++d) g_out[k].emplace_back(tree.layer_size(d), cfg.layer_out(k));
    }
    for (std::size_t b = 0; b < roots; ++b)
      for (std::size_t j = 0; j < dk; ++j) g_out[K - 1][0](b, j) = g_hist[(b * steps + t) * dk + j];

    for (std::size_t k = K; k-- > 0;) {
      const LifParams& lif = cfg.lif_for(k);
      const std::size_t out_dim = cfg.layer_out(k);
      const std::size_t in_depths = K - k + 1;
      const bool masked = detail::uses_masked_sum(cfg, k);
      g_msg.assign(in_depths, {});
      for (std::size_t d = 0; d < in_depths; ++d) g_msg[d] = Matrix<T>(tree.layer_size(d), out_dim);

      for (std::size_t d = 0; d + 1 < in_depths; ++d) {
        const auto pre = tape.pre_activation[t][k][d].values();
        const auto pot = tape.potential[t][k][d].values();
        const auto go = g_out[k][d].values();
        auto& c = carry[k][d];
        const std::size_t f = tree.fanouts()[d];
        const T share = T{1} / static_cast<T>(f + 1);
        for (std::size_t i = 0; i < pre.size(); ++i) {
          const T g_in = lif_step_backward(pre[i], pot[i], go[i], lif, cfg.fire, cfg.detach_threshold, c[i]);
          const std::size_t j = i / out_dim;
          const std::size_t col = i % out_dim;
          g_msg[d](j, col) += g_in * share;
          for (std::size_t ch = 0; ch < f; ++ch) g_msg[d + 1](j * f + ch, col) += g_in * share;
        }
      }

      for (std::size_t d = 0; d < in_depths; ++d) {
        if (k == 0)
          detail::gather_features(tg, t, tree.layer(t, d), input);
        else
          detail::spikes_from_tape(tape.pre_activation[t][k - 1][d], cfg.lif_for(k - 1), cfg.fire, input);
        for (std::size_t j = 0; j < input.rows(); ++j) {
          if (masked)
            masked_sum_backward_weights<T>(input.row(j), g_msg[d].row(j), grads.layers[k]);
          else
            accumulate_weight_grad<T>(input.row(j), g_msg[d].row(j), grads.layers[k]);
          if (k > 0) accumulate_input_grad<T>(g_msg[d].row(j), params.layers[k], g_out[k - 1][d].row(j));
        }
      }
    }
  }
}

// AdamW with decoupled weight decay.
struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// One AdamW update of a single tensor; `step` is the 1-based step count.
template <class T>
void adamw_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                  std::uint64_t step, const AdamWConfig& hp) {
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    double p = static_cast<double>(param[i]);
    const double g = static_cast<double>(grad[i]);
    p -= hp.lr * hp.weight_decay * p;
    const double mi = hp.beta1 * static_cast<double>(m[i]) + (1.0 - hp.beta1) * g;
    const double vi = hp.beta2 * static_cast<double>(v[i]) + (1.0 - hp.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    p -= hp.lr * (mi / bc1) / (std::sqrt(vi / bc2) + hp.eps);
    param[i] = static_cast<T>(p);
  }
}

template <class T>
struct OptimState {
  AdamWConfig hp;
  std::uint64_t step = 0;
  ModelParams<T> m;
  ModelParams<T> v;

  OptimState() = default;
  OptimState(const ModelConfig& cfg, AdamWConfig h)
      : hp(h), m(ModelParams<T>::zeros(cfg)), v(ModelParams<T>::zeros(cfg)) {}
};

template <class T>
void adamw_step(ModelParams<T>& params, ModelParams<T>& grads, OptimState<T>& opt) {
  ++opt.step;
  auto ps = params.tensors();
  auto gs = grads.tensors();
  auto ms = opt.m.tensors();
  auto vs = opt.v.tensors();
  if (ps.size() != gs.size() || ps.size() != ms.size())
    throw std::invalid_argument("adamw_step: tensor layout mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i)
    adamw_update<T>(ps[i].tensor->values(), gs[i].tensor->values(), ms[i].tensor->values(),
                    vs[i].tensor->values(), opt.step, opt.hp);
}

template <class T>
void add_into(ModelParams<T>& acc, ModelParams<T>& g) {
  auto a = acc.tensors();
  auto b = g.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto av = a[i].tensor->values();
    auto bv = b[i].tensor->values();
    for (std::size_t j = 0; j < av.size(); ++j) av[j] += bv[j];
  }
}

struct F1Scores {
  double macro = 0.0;
  double micro = 0.0;
};

/// Macro-F1 averages per-class F1 over classes that occur in labels or
/// predictions (a class with no true positives scores 0). Micro-F1 pools
/// TP/FP/FN over classes.
inline F1Scores f1_scores(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels,
                          std::size_t num_classes) {
  if (preds.size() != labels.size()) throw std::invalid_argument("f1_scores: length mismatch");
  std::vector<double> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::vector<bool> seen(num_classes, false);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = static_cast<std::size_t>(preds[i]);
    const auto l = static_cast<std::size_t>(labels[i]);
    if (p >= num_classes || l >= num_classes) throw std::out_of_range("f1_scores: class id out of range");
    seen[p] = seen[l] = true;
    if (p == l) {
      tp[p] += 1;
    } else {
      fp[p] += 1;
      fn[l] += 1;
    }
  }
  F1Scores s;
  double sum_f1 = 0, classes = 0, all_tp = 0, all_fp = 0, all_fn = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    all_tp += tp[c];
    all_fp += fp[c];
    all_fn += fn[c];
    if (!seen[c]) continue;
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    sum_f1 += denom > 0 ? 2 * tp[c] / denom : 0.0;
    classes += 1;
  }
  s.macro = classes > 0 ? sum_f1 / classes : 0.0;
  const double denom = 2 * all_tp + all_fp + all_fn;
  s.micro = denom > 0 ? 2 * all_tp / denom : 0.0;
  return s;
}

// Lowest class index wins ties.
template <class T>
std::int32_t argmax(std::span<const T> probs) {
  return static_cast<std::int32_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

struct SplitRatios {
  double train = 0.75;
  double val = 0.05;
  double test = 0.20;

  void validate() const {
    if (!(train > 0 && val >= 0 && test >= 0)) throw InputError("split ratios must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-6) throw InputError("split ratios must sum to 1");
  }
};

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

/// Per-class shuffle with the split substream, then cut by ratio. Unlabeled
/// nodes are left out of every split.
inline Split stratified_split(std::span<const std::int32_t> labels, const SplitRatios& ratios,
                              std::uint64_t seed) {
  ratios.validate();
  std::int32_t max_label = -1;
  for (auto l : labels) max_label = std::max(max_label, l);
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(max_label + 1));
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v] >= 0) by_class[static_cast<std::size_t>(labels[v])].push_back(static_cast<NodeId>(v));
  Split s;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& nodes = by_class[c];
    SplitMix64 rng(derive_seed(seed, Stream::split, {c}));
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const auto n = static_cast<double>(nodes.size());
    auto n_train = static_cast<std::size_t>(std::llround(n * ratios.train));
    auto n_val = static_cast<std::size_t>(std::llround(n * ratios.val));
    n_train = std::min(n_train, nodes.size());
    n_val = std::min(n_val, nodes.size() - n_train);
    s.train.insert(s.train.end(), nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.insert(s.val.end(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train),
                 nodes.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.insert(s.test.end(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), nodes.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

struct TrainConfig {
  std::size_t batch_size = 1024;
  AdamWConfig optimizer;
  std::size_t epochs = 100;
  std::size_t patience = 20;
  SplitRatios split;
  std::uint64_t seed = 0;
  bool strict_deterministic = false;
  std::size_t threads = 1;

  std::size_t worker_count() const { return strict_deterministic ? 1 : std::max<std::size_t>(1, threads); }

  void validate() const {
    if (batch_size == 0) throw InputError("train: batch_size must be positive");
    if (!(optimizer.lr >= 0)) throw InputError("train: lr must be >= 0");
    if (!(optimizer.weight_decay >= 0)) throw InputError("train: weight_decay must be >= 0");
    split.validate();
  }
};

namespace detail {

// Runs fn(chunk, begin, end) over `workers` contiguous chunks of [0, n).
// Chunk boundaries depend only on n and workers.
template <class Fn>
void run_chunks(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  auto bounds = [&](std::size_t c) { return n * c / workers; };
  if (workers == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t c = 0; c < workers; ++c)
    pool.emplace_back([&, c] {
      try {
        fn(c, bounds(c), bounds(c + 1));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline constexpr std::uint64_t kEvalRound = 0;

struct EvalResult {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double loss = 0.0;
  std::size_t count = 0;
};

/// Inference over `nodes` with hard spikes. Samples are drawn from the fixed
/// evaluation round, keyed per node, so results do not depend on node order
/// or batching.
template <class T>
EvalResult evaluate(const TemporalGraph& tg, const ModelConfig& cfg, const SamplerConfig& sampler,
                    const ModelParams<T>& params, std::span<const NodeId> nodes,
                    std::size_t batch_size = 1024, std::size_t workers = 1,
                    FiringStats* stats = nullptr, std::vector<std::int32_t>* predictions = nullptr) {
  if (nodes.empty()) throw InputError("evaluate: empty node set");
  if (!tg.has_labels()) throw InputError("evaluate: graph has no labels");
  std::vector<std::int32_t> preds(nodes.size());
  std::vector<std::int32_t> labels(nodes.size());
  std::vector<double> losses(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    labels[i] = tg.labels()[nodes[i]];
    if (labels[i] < 0) throw InputError("evaluate: node " + std::to_string(nodes[i]) + " is unlabeled");
  }
  const std::size_t bs = std::max<std::size_t>(1, batch_size);
  for (std::size_t start = 0; start < nodes.size(); start += bs) {
    const std::size_t end = std::min(nodes.size(), start + bs);
    std::vector<FiringStats> chunk_stats(std::max<std::size_t>(1, workers));
    detail::run_chunks(end - start, workers, [&](std::size_t c, std::size_t b, std::size_t e) {
      auto roots = nodes.subspan(start + b, e - b);
      auto tree = build_batch_tree(tg, roots, sampler, kEvalRound);
      auto probs = predict_batch(tg, tree, cfg, params, stats ? &chunk_stats[c] : nullptr);
      for (std::size_t r = 0; r < roots.size(); ++r) {
        const std::size_t i = start + b + r;
        preds[i] = argmax<T>(probs.row(r));
        losses[i] = static_cast<double>(cross_entropy<T>(probs.row(r), static_cast<std::size_t>(labels[i])));
      }
    });
    if (stats)
      for (const auto& s : chunk_stats) stats->merge(s);
  }
  EvalResult r;
  const auto f1 = f1_scores(preds, labels, std::max<std::size_t>(tg.num_classes(), cfg.num_classes));
  r.macro_f1 = f1.macro;
  r.micro_f1 = f1.micro;
  r.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(nodes.size());
  r.count = nodes.size();
  if (predictions) *predictions = std::move(preds);
  return r;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  EvalResult val;
  double firing_rate = 0.0;
  double wall_seconds = 0.0;
};

template <class T>
struct TrainResult {
  ModelParams<T> params;
  Split split;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;  // 0: the initial parameters
  EvalResult best_val;
  EvalResult test;
};

namespace detail {

inline bool better(const EvalResult& a, const EvalResult& b) {
  if (a.micro_f1 != b.micro_f1) return a.micro_f1 > b.micro_f1;
  return a.loss < b.loss;
}

}  // namespace detail

/// Mini-batch training with surrogate-gradient BPTT and AdamW. Selects the
/// epoch with the best validation Micro-F1 (validation loss breaks ties),
/// stops after `patience` epochs without improvement and returns those
/// parameters along with their test scores.
template <class T = float>
TrainResult<T> train(const TemporalGraph& tg, const ModelConfig& cfg, const SamplerConfig& sampler,
                     const TrainConfig& tc, ModelParams<T> params,
                     const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  cfg.validate();
  sampler.validate();
  tc.validate();
  if (!tg.has_labels()) throw InputError("train: no labels loaded");
  TrainResult<T> result;
  result.split = stratified_split(tg.labels(), tc.split, tc.seed);
  const auto& split = result.split;
  if (split.train.empty()) throw InputError("train: no labeled nodes in the training split");
  // Tiny label sets can leave validation empty; selection then uses the training nodes.
  const std::vector<NodeId>& select_nodes = split.val.empty() ? split.train : split.val;
  const std::size_t workers = tc.worker_count();

  OptimState<T> opt(cfg, tc.optimizer);
  auto best_params = params;
  auto best_val = evaluate(tg, cfg, sampler, params, select_nodes, tc.batch_size, workers);
  std::size_t best_epoch = 0;
  std::size_t since_best = 0;

  std::vector<NodeId> order = split.train;
  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    SplitMix64 shuffle_rng(derive_seed(tc.seed, Stream::shuffle, {epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_total = 0.0;
    FiringStats firing;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      const std::size_t batch = end - start;
      const T scale = T{1} / static_cast<T>(batch);
      std::vector<ModelParams<T>> chunk_grads(workers);
      std::vector<double> chunk_loss(workers, 0.0);
      std::vector<FiringStats> chunk_firing(workers);
      detail::run_chunks(batch, workers, [&](std::size_t c, std::size_t b, std::size_t e) {
        std::span<const NodeId> roots(order.data() + start + b, e - b);
        std::vector<std::int32_t> targets(roots.size());
        for (std::size_t i = 0; i < roots.size(); ++i) targets[i] = tg.labels()[roots[i]];
        auto tree = build_batch_tree(tg, roots, sampler, epoch);
        ForwardTape<T> tape;
        chunk_loss[c] = static_cast<double>(forward_loss(tg, tree, cfg, params, targets, tape, scale, &chunk_firing[c]));
        chunk_grads[c] = ModelParams<T>::zeros(cfg);
        backward(tape, cfg, params, chunk_grads[c]);
      });
      double batch_loss = 0.0;
      for (std::size_t c = 0; c < workers; ++c) {
        if (chunk_grads[c].layers.empty()) continue;
        batch_loss += chunk_loss[c];
        firing.merge(chunk_firing[c]);
        if (c > 0) add_into(chunk_grads[0], chunk_grads[c]);
      }
      if (!std::isfinite(batch_loss))
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      adamw_step(params, chunk_grads[0], opt);
      loss_total += batch_loss * static_cast<double>(batch);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_total / static_cast<double>(order.size());
    rec.val = evaluate(tg, cfg, sampler, params, select_nodes, tc.batch_size, workers);
    rec.firing_rate = firing.rate();
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (detail::better(rec.val, best_val)) {
      best_val = rec.val;
      best_params = params;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= tc.patience) {
      break;
    }
  }

  result.params = std::move(best_params);
  result.best_epoch = best_epoch;
  result.best_val = best_val;
  if (!split.test.empty())
    result.test = evaluate(tg, cfg, sampler, result.params, split.test, tc.batch_size, workers);
  return result;
}

}  // namespace spikenet
