#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/matrix.hpp"
#include "spikenet/rng.hpp"
#include "spikenet/tgraph.hpp"

namespace spikenet {

// Dynamic stochastic block model. Every step draws a fresh edge set from the
// current community assignment; from step ceil(T/2) on a switch_fraction of
// each community has moved to another one. Label = initial community +
// C * migrated, so only the sequence tells a mover from a settled node.
struct SynthSpec {
  std::size_t num_nodes = 200;
  std::size_t num_steps = 8;
  std::size_t num_communities = 2;
  double switch_fraction = 0.5;
  double p_intra = 0.05;
  double p_inter = 0.005;
  double noise = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (num_nodes == 0) throw InputError("synthetic: num_nodes must be positive");
    if (num_steps == 0) throw InputError("synthetic: num_steps must be positive");
    if (num_communities == 0 || num_communities > num_nodes)
      throw InputError("synthetic: num_communities must be in [1, num_nodes]");
    if (!prob(p_intra) || !prob(p_inter)) throw InputError("synthetic: edge probabilities must lie in [0, 1]");
    if (!prob(switch_fraction)) throw InputError("synthetic: switch_fraction must lie in [0, 1]");
    if (switch_fraction > 0.0 && num_communities < 2)
      throw InputError("synthetic: migration needs at least 2 communities");
    if (!(noise >= 0.0)) throw InputError("synthetic: noise must be >= 0");
  }

  std::size_t switch_step() const { return (num_steps + 1) / 2; }
  std::size_t num_classes() const { return switch_fraction > 0.0 ? 2 * num_communities : num_communities; }
};

struct SyntheticData {
  SynthSpec spec;
  std::vector<TimedEdge> edges;                   // sorted by (step, src, dst), src < dst
  std::vector<std::vector<std::uint32_t>> community;  // [step][node]
  std::vector<std::int32_t> labels;
  std::vector<Matrix<float>> features;            // [step] N x C
};

namespace detail {

inline double unit_double(SplitMix64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

inline SyntheticData generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.num_nodes;
  const std::size_t T = spec.num_steps;
  const std::size_t C = spec.num_communities;
  SyntheticData out;
  out.spec = spec;

  // Balanced communities over a shuffled node order.
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  SplitMix64 assign_rng(derive_seed(spec.seed, Stream::synth, {0}));
  std::shuffle(order.begin(), order.end(), assign_rng);
  std::vector<std::uint32_t> initial(n);
  for (std::size_t i = 0; i < n; ++i) initial[order[i]] = static_cast<std::uint32_t>(i % C);

  // Movers are picked per community so every class keeps its share.
  std::vector<std::uint32_t> final_comm = initial;
  std::vector<bool> migrated(n, false);
  SplitMix64 move_rng(derive_seed(spec.seed, Stream::synth, {1}));
  for (std::uint32_t c = 0; c < C; ++c) {
    std::vector<NodeId> members;
    for (std::size_t v = 0; v < n; ++v)
      if (initial[v] == c) members.push_back(static_cast<NodeId>(v));
    std::shuffle(members.begin(), members.end(), move_rng);
    const auto movers = static_cast<std::size_t>(std::llround(spec.switch_fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < movers; ++i) {
      const NodeId v = members[i];
      migrated[v] = true;
      const auto shift = 1 + static_cast<std::uint32_t>(move_rng() % (C - 1));
      final_comm[v] = (c + shift) % static_cast<std::uint32_t>(C);
    }
  }

  out.labels.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    out.labels[v] = static_cast<std::int32_t>(initial[v] + (migrated[v] ? C : 0));

  out.community.resize(T);
  for (std::size_t t = 0; t < T; ++t) out.community[t] = t < spec.switch_step() ? initial : final_comm;

  for (std::size_t t = 0; t < T; ++t) {
    const auto& comm = out.community[t];
    SplitMix64 edge_rng(derive_seed(spec.seed, Stream::synth, {2, t}));
    std::vector<std::size_t> degree(n, 0);
    std::vector<TimedEdge> step_edges;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) {
        const double p = comm[u] == comm[v] ? spec.p_intra : spec.p_inter;
        if (detail::unit_double(edge_rng) < p) {
          step_edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), t});
          ++degree[u];
          ++degree[v];
        }
      }
    // No node is left isolated in a step: give it one partner from its community.
    for (std::size_t u = 0; u < n; ++u) {
      if (degree[u] > 0) continue;
      std::vector<NodeId> mates;
      for (std::size_t v = 0; v < n; ++v)
        if (v != u && comm[v] == comm[u]) mates.push_back(static_cast<NodeId>(v));
      if (mates.empty()) continue;
      const NodeId w = mates[edge_rng() % mates.size()];
      step_edges.push_back({std::min<NodeId>(static_cast<NodeId>(u), w), std::max<NodeId>(static_cast<NodeId>(u), w), t});
      ++degree[u];
      ++degree[w];
    }
    std::sort(step_edges.begin(), step_edges.end(), [](const TimedEdge& a, const TimedEdge& b) {
      return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    out.edges.insert(out.edges.end(), step_edges.begin(), step_edges.end());
  }

  SplitMix64 noise_rng(derive_seed(spec.seed, Stream::synth, {3}));
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.features.assign(T, Matrix<float>(n, C));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t c = 0; c < C; ++c) {
        const double hot = out.community[t][v] == c ? 1.0 : 0.0;
        out.features[t](v, c) = static_cast<float>(hot + spec.noise * gauss(noise_rng));
      }
  return out;
}

/// The dataset as a temporal graph with dense ids 0..N-1.
inline TemporalGraph to_temporal_graph(const SyntheticData& data, SnapshotMode mode = SnapshotMode::windowed) {
  auto tg = build_temporal_graph(data.spec.num_nodes, data.spec.num_steps, data.edges, mode);
  tg.set_features(FeatureStore::from_steps(data.features));
  tg.set_labels(data.labels);
  return tg;
}

/// Writes edges.txt, labels.txt, features.txt and a config.txt that loads them.
inline void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory '" + dir.string() + "': " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw InputError("cannot write '" + (dir / name).string() + "'");
    return f;
  };
  const auto& s = data.spec;
  {
    auto f = open("edges.txt");
    f << "# src dst step\n";
    for (const auto& e : data.edges) f << e.src << ' ' << e.dst << ' ' << e.step << '\n';
  }
  {
    auto f = open("labels.txt");
    for (std::size_t v = 0; v < data.labels.size(); ++v) f << v << ' ' << data.labels[v] << '\n';
  }
  {
    auto f = open("features.txt");
    f.precision(9);
    f << s.num_steps << ' ' << s.num_nodes << ' ' << s.num_communities << '\n';
    for (const auto& m : data.features)
      for (std::size_t v = 0; v < m.rows(); ++v) {
        for (std::size_t c = 0; c < m.cols(); ++c) f << (c ? " " : "") << m(v, c);
        f << '\n';
      }
  }
  {
    auto f = open("config.txt");
    f << "# dynamic SBM: n=" << s.num_nodes << " T=" << s.num_steps << " C=" << s.num_communities
      << " switch_fraction=" << s.switch_fraction << " p_intra=" << s.p_intra << " p_inter=" << s.p_inter
      << " noise=" << s.noise << " seed=" << s.seed << '\n';
    f << "edges = edges.txt\nlabels = labels.txt\nfeatures = features.txt\n";
    f << "t_bins = " << s.num_steps << "\nsnapshot_mode = windowed\n";
  }
}

}  // namespace spikenet
