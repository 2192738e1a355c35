#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/rng.hpp"
#include "spikenet/tgraph.hpp"

namespace spikenet {

struct SamplerConfig {
  // Root layer first: fanouts[0] neighbors per root, fanouts[1] per first-hop node, ...
  std::vector<std::size_t> fanouts{5, 3};
  double macro_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (fanouts.empty()) throw InputError("sampler: at least one fanout required");
    for (auto f : fanouts)
      if (f < 1) throw InputError("sampler: every fanout must be >= 1");
    if (!(macro_fraction >= 0.0 && macro_fraction <= 1.0))
      throw InputError("sampler: macro_fraction must lie in [0, 1]");
  }
};

/// k uniform draws with replacement from v's neighbors in g; a dangling node
/// yields k copies of itself.
template <class Rng>
void sample_uniform(const SnapshotGraph& g, NodeId v, std::size_t k, Rng& rng,
                    std::span<NodeId> out) {
  auto nb = g.neighbors(v);
  if (nb.empty()) {
    std::fill_n(out.begin(), k, v);
    return;
  }
  std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
  for (std::size_t i = 0; i < k; ++i) out[i] = nb[pick(rng)];
}

template <class Rng>
std::vector<NodeId> sample_uniform(const SnapshotGraph& g, NodeId v, std::size_t k, Rng& rng) {
  std::vector<NodeId> out(k);
  sample_uniform(g, v, k, rng, std::span<NodeId>(out));
  return out;
}

/// Number of the k slots drawn from the full snapshot; the odd slot goes to
/// the snapshot.
inline std::size_t macro_share(std::size_t k, double macro_fraction) {
  auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(k) * macro_fraction - 1e-9));
  return std::min(m, k);
}

/// Temporal neighborhood sample at `step`: the first macro_share(k) slots come
/// from the cumulative snapshot, the rest from the delta graph. When v has no
/// delta edges at this step the remaining slots are drawn from the snapshot
/// too. Duplicates across the two sources are kept.
template <class Rng>
void sample_temporal(const TemporalGraph& tg, NodeId v, std::size_t step, std::size_t k,
                     double macro_fraction, Rng& rng, std::span<NodeId> out) {
  const auto& macro = tg.snapshot(step);
  const auto& micro = tg.delta(step);
  const std::size_t k_macro = macro_share(k, macro_fraction);
  sample_uniform(macro, v, k_macro, rng, out.first(k_macro));
  const auto& micro_src = micro.degree(v) > 0 ? micro : macro;
  sample_uniform(micro_src, v, k - k_macro, rng, out.subspan(k_macro, k - k_macro));
}

template <class Rng>
std::vector<NodeId> sample_temporal(const TemporalGraph& tg, NodeId v, std::size_t step,
                                    std::size_t k, double macro_fraction, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample_temporal: k must be >= 1");
  std::vector<NodeId> out(k);
  sample_temporal(tg, v, step, k, macro_fraction, rng, std::span<NodeId>(out));
  return out;
}

// Per-step sampled expansion of a batch of roots. Depth 0 holds the roots;
// depth d holds roots * fanouts[0] * ... * fanouts[d-1] nodes, and the
// children of node j at depth d occupy [j * f, (j + 1) * f) at depth d + 1
// with f = fanouts[d].
class SampleTree {
 public:
  SampleTree() = default;
  SampleTree(std::size_t num_steps, std::size_t num_roots, std::vector<std::size_t> fanouts)
      : num_steps_(num_steps), fanouts_(std::move(fanouts)) {
    sizes_.push_back(num_roots);
    for (auto f : fanouts_) sizes_.push_back(sizes_.back() * f);
    nodes_.assign(num_steps_, {});
    for (auto& per_step : nodes_)
      for (auto s : sizes_) per_step.emplace_back(s);
  }

  std::size_t num_steps() const { return num_steps_; }
  std::size_t num_roots() const { return sizes_.front(); }
  // Number of sampled hops K.
  std::size_t depth() const { return fanouts_.size(); }
  const std::vector<std::size_t>& fanouts() const { return fanouts_; }
  std::size_t layer_size(std::size_t depth) const { return sizes_.at(depth); }

  std::span<const NodeId> layer(std::size_t step, std::size_t depth) const {
    return nodes_.at(step).at(depth);
  }
  std::span<NodeId> layer(std::size_t step, std::size_t depth) { return nodes_.at(step).at(depth); }

  friend bool operator==(const SampleTree&, const SampleTree&) = default;

 private:
  std::size_t num_steps_ = 0;
  std::vector<std::size_t> fanouts_;
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<std::vector<NodeId>>> nodes_;
};

/// Engine for one root's expansion at one step. Keyed by the root's node id,
/// so a root's samples do not depend on which batch it lands in.
inline SplitMix64 root_stream(std::uint64_t seed, std::uint64_t round, NodeId root, std::size_t step) {
  return SplitMix64(derive_seed(seed, Stream::sampler, {round, root, step}));
}

/// Expands root j of the tree (all steps, all depths).
inline void expand_root(const TemporalGraph& tg, const SamplerConfig& cfg, std::uint64_t round,
                        std::size_t j, SampleTree& tree) {
  const NodeId root = tree.layer(0, 0)[j];
  for (std::size_t t = 0; t < tree.num_steps(); ++t) {
    auto rng = root_stream(cfg.seed, round, root, t);
    std::size_t first = j;  // block of this root's descendants at the current depth
    std::size_t count = 1;
    for (std::size_t d = 0; d < tree.depth(); ++d) {
      const std::size_t f = tree.fanouts()[d];
      auto parents = tree.layer(t, d);
      auto children = tree.layer(t, d + 1);
      for (std::size_t p = first; p < first + count; ++p)
        sample_temporal(tg, parents[p], t, f, cfg.macro_fraction, rng, children.subspan(p * f, f));
      first *= f;
      count *= f;
    }
  }
}

/// Samples the full tree for `roots`. `round` separates draws between epochs
/// (training) and fixes them for evaluation.
inline SampleTree build_batch_tree(const TemporalGraph& tg, std::span<const NodeId> roots,
                                   const SamplerConfig& cfg, std::uint64_t round) {
  cfg.validate();
  if (roots.empty()) throw std::invalid_argument("build_batch_tree: no roots");
  SampleTree tree(tg.num_steps(), roots.size(), cfg.fanouts);
  for (std::size_t t = 0; t < tg.num_steps(); ++t) {
    auto layer0 = tree.layer(t, 0);
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (roots[j] >= tg.num_nodes()) throw std::out_of_range("build_batch_tree: root id out of range");
      layer0[j] = roots[j];
    }
  }
  for (std::size_t j = 0; j < roots.size(); ++j) expand_root(tg, cfg, round, j, tree);
  return tree;
}

}  // namespace spikenet
