#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/matrix.hpp"

namespace spikenet {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

inline constexpr std::int32_t kUnlabeled = -1;

// Undirected graph in compressed adjacency form. Every edge is stored in both
// directions; adjacency lists are sorted and free of duplicates/self-loops.
class SnapshotGraph {
 public:
  SnapshotGraph() : offsets_(1, 0) {}
  explicit SnapshotGraph(std::size_t num_nodes) : offsets_(num_nodes + 1, 0) {}

  static SnapshotGraph from_edges(std::size_t num_nodes, std::span<const Edge> edges) {
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
      if (u >= num_nodes || v >= num_nodes)
        throw std::out_of_range("SnapshotGraph: edge endpoint out of range");
      if (u == v) continue;
      directed.emplace_back(u, v);
      directed.emplace_back(v, u);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    SnapshotGraph g(num_nodes);
    g.targets_.reserve(directed.size());
    for (auto [u, v] : directed) {
      ++g.offsets_[u + 1];
      g.targets_.push_back(v);
    }
    for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
    return g;
  }

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return targets_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    if (v >= num_nodes()) throw std::out_of_range("neighbors: node id out of range");
    return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  std::size_t degree(NodeId v) const { return neighbors(v).size(); }

  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  // Each undirected edge once, as (u, v) with u < v, in sorted order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes(); ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<NodeId>& targets() const { return targets_; }

  friend bool operator==(const SnapshotGraph&, const SnapshotGraph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
};

// Edges of `a` that are absent from `b` (same node count).
inline SnapshotGraph edge_difference(const SnapshotGraph& a, const SnapshotGraph& b) {
  std::vector<Edge> kept;
  for (auto e : a.edges())
    if (e.first >= b.num_nodes() || !b.has_edge(e.first, e.second)) kept.push_back(e);
  return SnapshotGraph::from_edges(a.num_nodes(), kept);
}

enum class FeatureMode { static_features, per_step };

// Node features, either one N x d matrix broadcast over all steps or one
// matrix per step.
class FeatureStore {
 public:
  FeatureStore() = default;

  static FeatureStore zeros(std::size_t num_nodes, std::size_t dim) {
    return from_static(Matrix<float>(num_nodes, dim));
  }

  static FeatureStore from_static(Matrix<float> x) {
    FeatureStore fs;
    fs.mode_ = FeatureMode::static_features;
    fs.steps_.push_back(std::move(x));
    fs.check_finite();
    return fs;
  }

  static FeatureStore from_steps(std::vector<Matrix<float>> xs) {
    if (xs.empty()) throw std::invalid_argument("FeatureStore: no steps");
    for (const auto& x : xs)
      if (x.rows() != xs.front().rows() || x.cols() != xs.front().cols())
        throw FormatError("FeatureStore: per-step feature matrices differ in shape");
    FeatureStore fs;
    fs.mode_ = FeatureMode::per_step;
    fs.steps_ = std::move(xs);
    fs.check_finite();
    return fs;
  }

  FeatureMode mode() const { return mode_; }
  std::size_t dim() const { return steps_.empty() ? 0 : steps_.front().cols(); }
  std::size_t num_nodes() const { return steps_.empty() ? 0 : steps_.front().rows(); }
  // 1 for static stores.
  std::size_t num_steps() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

  std::span<const float> row(std::size_t step, NodeId v) const {
    const auto& m = mode_ == FeatureMode::static_features ? steps_.front() : steps_.at(step);
    return m.row(v);
  }

  const Matrix<float>& step_matrix(std::size_t step) const {
    return mode_ == FeatureMode::static_features ? steps_.front() : steps_.at(step);
  }

 private:
  void check_finite() const {
    for (const auto& m : steps_)
      for (float v : m.values())
        if (!std::isfinite(v)) throw FormatError("FeatureStore: non-finite feature value");
  }

  FeatureMode mode_ = FeatureMode::static_features;
  std::vector<Matrix<float>> steps_;
};

enum class SnapshotMode { cumulative, windowed };

inline std::string to_string(SnapshotMode m) {
  return m == SnapshotMode::cumulative ? "cumulative" : "windowed";
}

inline SnapshotMode parse_snapshot_mode(const std::string& s) {
  if (s == "cumulative") return SnapshotMode::cumulative;
  if (s == "windowed") return SnapshotMode::windowed;
  throw InputError("unknown snapshot mode '" + s + "' (expected cumulative|windowed)");
}

// Edge tagged with the 0-based time step it was established in.
struct TimedEdge {
  NodeId src;
  NodeId dst;
  std::size_t step;
};

// A sequence of T snapshots over a common node set, the per-step delta
// graphs, features and labels. Steps are 0-based here: step 0 is the first
// snapshot, and delta(0) equals snapshot(0).
class TemporalGraph {
 public:
  TemporalGraph() = default;

  TemporalGraph(std::vector<SnapshotGraph> snapshots, SnapshotMode mode,
                std::vector<std::int64_t> node_ids = {})
      : mode_(mode), snapshots_(std::move(snapshots)), node_ids_(std::move(node_ids)) {
    if (snapshots_.empty()) throw std::invalid_argument("TemporalGraph: no snapshots");
    num_nodes_ = snapshots_.front().num_nodes();
    for (const auto& g : snapshots_)
      if (g.num_nodes() != num_nodes_)
        throw std::invalid_argument("TemporalGraph: snapshots disagree on node count");
    if (node_ids_.empty()) {
      node_ids_.resize(num_nodes_);
      for (std::size_t i = 0; i < num_nodes_; ++i) node_ids_[i] = static_cast<std::int64_t>(i);
    }
    if (node_ids_.size() != num_nodes_)
      throw std::invalid_argument("TemporalGraph: node id map size mismatch");
    ids_sorted_ = std::is_sorted(node_ids_.begin(), node_ids_.end());
    deltas_.reserve(snapshots_.size());
    deltas_.push_back(snapshots_.front());
    for (std::size_t t = 1; t < snapshots_.size(); ++t)
      deltas_.push_back(edge_difference(snapshots_[t], snapshots_[t - 1]));
    features_ = FeatureStore::zeros(num_nodes_, 0);
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_steps() const { return snapshots_.size(); }
  SnapshotMode mode() const { return mode_; }

  const SnapshotGraph& snapshot(std::size_t step) const {
    check_step(step);
    return snapshots_[step];
  }

  const SnapshotGraph& delta(std::size_t step) const {
    check_step(step);
    return deltas_[step];
  }

  const FeatureStore& features() const { return features_; }

  void set_features(FeatureStore fs) {
    if (fs.num_nodes() != num_nodes_)
      throw FormatError("features cover " + std::to_string(fs.num_nodes()) + " nodes, graph has " +
                        std::to_string(num_nodes_));
    if (fs.mode() == FeatureMode::per_step && fs.num_steps() != num_steps())
      throw FormatError("per-step features have " + std::to_string(fs.num_steps()) +
                        " steps, graph has " + std::to_string(num_steps()));
    features_ = std::move(fs);
  }

  std::span<const std::int32_t> labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  void set_labels(std::vector<std::int32_t> labels) {
    if (labels.size() != num_nodes_) throw FormatError("label array size != node count");
    labels_ = std::move(labels);
  }

  std::size_t num_classes() const {
    std::int32_t mx = -1;
    for (auto l : labels_) mx = std::max(mx, l);
    return static_cast<std::size_t>(mx + 1);
  }

  const std::vector<std::int64_t>& node_ids() const { return node_ids_; }

  std::optional<NodeId> index_of(std::int64_t original) const {
    if (ids_sorted_) {
      auto it = std::lower_bound(node_ids_.begin(), node_ids_.end(), original);
      if (it != node_ids_.end() && *it == original)
        return static_cast<NodeId>(it - node_ids_.begin());
      return std::nullopt;
    }
    for (std::size_t i = 0; i < node_ids_.size(); ++i)
      if (node_ids_[i] == original) return static_cast<NodeId>(i);
    return std::nullopt;
  }

  // The last snapshot as a one-step graph (features of the last step).
  TemporalGraph final_snapshot_only() const {
    TemporalGraph out({snapshots_.back()}, mode_, node_ids_);
    if (features_.mode() == FeatureMode::per_step)
      out.features_ = FeatureStore::from_static(features_.step_matrix(num_steps() - 1));
    else
      out.features_ = features_;
    out.labels_ = labels_;
    return out;
  }

 private:
  void check_step(std::size_t step) const {
    if (step >= snapshots_.size())
      throw std::out_of_range("time step " + std::to_string(step) + " out of range [0, " +
                              std::to_string(snapshots_.size()) + ")");
  }

  std::size_t num_nodes_ = 0;
  SnapshotMode mode_ = SnapshotMode::cumulative;
  std::vector<SnapshotGraph> snapshots_;
  std::vector<SnapshotGraph> deltas_;
  FeatureStore features_;
  std::vector<std::int32_t> labels_;
  std::vector<std::int64_t> node_ids_;
  bool ids_sorted_ = true;
};

// Builds snapshots from step-tagged edges. Cumulative: snapshot t holds every
// edge with step <= t. Windowed: only edges with step == t.
inline TemporalGraph build_temporal_graph(std::size_t num_nodes, std::size_t num_steps,
                                          std::span<const TimedEdge> edges, SnapshotMode mode,
                                          std::vector<std::int64_t> node_ids = {}) {
  if (num_steps == 0) throw std::invalid_argument("build_temporal_graph: num_steps must be >= 1");
  std::vector<std::vector<Edge>> per_step(num_steps);
  for (const auto& e : edges) {
    if (e.step >= num_steps) throw std::out_of_range("build_temporal_graph: edge step out of range");
    per_step[e.step].emplace_back(e.src, e.dst);
  }
  std::vector<SnapshotGraph> snaps;
  snaps.reserve(num_steps);
  std::vector<Edge> running;
  for (std::size_t t = 0; t < num_steps; ++t) {
    if (mode == SnapshotMode::cumulative) {
      running.insert(running.end(), per_step[t].begin(), per_step[t].end());
      snaps.push_back(SnapshotGraph::from_edges(num_nodes, running));
    } else {
      snaps.push_back(SnapshotGraph::from_edges(num_nodes, per_step[t]));
    }
  }
  return TemporalGraph(std::move(snaps), mode, std::move(node_ids));
}

struct EdgeStreamOptions {
  std::size_t num_bins = 1;
  SnapshotMode mode = SnapshotMode::cumulative;
  // Overrides for the binning range; default is [min t, max t] of the file.
  std::optional<double> t_min;
  std::optional<double> t_max;
};

namespace detail {

inline bool is_blank_or_comment(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

inline std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no) + ": ";
}

}  // namespace detail

inline std::size_t time_bin(double t, double t_min, double t_max, std::size_t num_bins) {
  if (num_bins <= 1 || !(t_max > t_min)) return 0;
  double pos = std::floor((t - t_min) / (t_max - t_min) * static_cast<double>(num_bins));
  pos = std::clamp(pos, 0.0, static_cast<double>(num_bins - 1));
  return static_cast<std::size_t>(pos);
}

/// Parses `src dst t` lines, bins timestamps into equal-width bins and builds
/// the snapshot sequence. Node ids are remapped densely in ascending order of
/// the original ids.
inline TemporalGraph parse_edge_stream(std::istream& in, const EdgeStreamOptions& opts,
                                       std::vector<std::string>* warnings = nullptr,
                                       const std::string& source = "<edges>") {
  if (opts.num_bins == 0) throw InputError("number of time bins must be >= 1");
  struct Raw {
    std::int64_t src, dst;
    double t;
  };
  std::vector<Raw> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    std::istringstream ss(line);
    Raw r{};
    std::string extra;
    if (!(ss >> r.src >> r.dst >> r.t) || (ss >> extra))
      throw FormatError(detail::where(source, line_no) + "expected 'src dst t', got '" + line + "'");
    if (!std::isfinite(r.t))
      throw FormatError(detail::where(source, line_no) + "non-finite timestamp");
    raw.push_back(r);
  }
  if (raw.empty()) throw InputError(source + ": edge file contains no edges");

  std::vector<std::int64_t> ids;
  ids.reserve(raw.size() * 2);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::set<double> distinct;
  std::size_t self_loops = 0;
  for (const auto& r : raw) {
    ids.push_back(r.src);
    ids.push_back(r.dst);
    lo = std::min(lo, r.t);
    hi = std::max(hi, r.t);
    distinct.insert(r.t);
    if (r.src == r.dst) ++self_loops;
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  lo = opts.t_min.value_or(lo);
  hi = opts.t_max.value_or(hi);

  if (warnings) {
    if (distinct.size() < opts.num_bins)
      warnings->push_back(source + ": " + std::to_string(opts.num_bins) +
                          " bins requested but only " + std::to_string(distinct.size()) +
                          " distinct timestamps; some bins are empty");
    if (self_loops > 0)
      warnings->push_back(source + ": dropped " + std::to_string(self_loops) + " self-loop(s)");
  }

  auto dense = [&](std::int64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  std::vector<TimedEdge> edges;
  edges.reserve(raw.size());
  for (const auto& r : raw)
    edges.push_back({dense(r.src), dense(r.dst), time_bin(r.t, lo, hi, opts.num_bins)});
  const std::size_t n = ids.size();
  return build_temporal_graph(n, opts.num_bins, edges, opts.mode, std::move(ids));
}

inline TemporalGraph load_edge_stream(const std::filesystem::path& path,
                                      const EdgeStreamOptions& opts,
                                      std::vector<std::string>* warnings = nullptr) {
  auto in = detail::open_input(path);
  return parse_edge_stream(in, opts, warnings, path.string());
}

/// Writes the graph back as `src dst step` lines using original node ids.
/// Cumulative graphs emit each edge once, at the step it was established;
/// windowed graphs emit every snapshot's edges. Reloading with
/// t_min = 0, t_max = T - 1 reproduces the same snapshots.
inline void write_edge_stream(const TemporalGraph& tg, std::ostream& out) {
  const auto& ids = tg.node_ids();
  for (std::size_t t = 0; t < tg.num_steps(); ++t) {
    const auto& g = tg.mode() == SnapshotMode::cumulative ? tg.delta(t) : tg.snapshot(t);
    for (auto [u, v] : g.edges()) out << ids[u] << ' ' << ids[v] << ' ' << t << '\n';
  }
}

/// `node label` lines; nodes not listed get kUnlabeled.
inline std::vector<std::int32_t> parse_labels(std::istream& in, const TemporalGraph& tg,
                                              const std::string& source = "<labels>") {
  std::vector<std::int32_t> labels(tg.num_nodes(), kUnlabeled);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::int64_t node = 0;
    std::int64_t label = 0;
    std::string extra;
    if (!(ss >> node >> label) || (ss >> extra))
      throw FormatError(detail::where(source, line_no) + "expected 'node label', got '" + line + "'");
    if (label < 0 || label > std::numeric_limits<std::int32_t>::max())
      throw FormatError(detail::where(source, line_no) + "label must be a non-negative integer");
    auto idx = tg.index_of(node);
    if (!idx) throw FormatError(detail::where(source, line_no) + "unknown node id " + std::to_string(node));
    auto& slot = labels[*idx];
    if (slot != kUnlabeled && slot != label)
      throw FormatError(detail::where(source, line_no) + "conflicting labels for node " +
                        std::to_string(node));
    slot = static_cast<std::int32_t>(label);
  }
  return labels;
}

inline std::vector<std::int32_t> load_labels(const std::filesystem::path& path,
                                             const TemporalGraph& tg) {
  auto in = detail::open_input(path);
  return parse_labels(in, tg, path.string());
}

/// Feature file: header `N d` (static) or `T N d` (one block of N rows per
/// step), followed by rows of d decimals. Row r belongs to original node id r;
/// graph nodes whose id is >= N keep zero features, rows for ids absent from
/// the graph are ignored.
inline FeatureStore parse_features(std::istream& in, const TemporalGraph& tg,
                                   const std::string& source = "<features>") {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    std::istringstream ss(line);
    long long v = 0;
    while (ss >> v) {
      if (v < 0) throw FormatError(detail::where(source, line_no) + "negative size in header");
      header.push_back(static_cast<std::size_t>(v));
    }
    if (!ss.eof() || (header.size() != 2 && header.size() != 3))
      throw FormatError(detail::where(source, line_no) + "expected header 'N d' or 'T N d'");
    break;
  }
  if (header.empty()) throw FormatError(source + ": missing header");
  const bool per_step = header.size() == 3;
  const std::size_t steps = per_step ? header[0] : 1;
  const std::size_t rows = header[per_step ? 1 : 0];
  const std::size_t dim = header[per_step ? 2 : 1];
  if (per_step && steps != tg.num_steps())
    throw FormatError(source + ": dimension mismatch, " + std::to_string(steps) +
                      " feature steps for a graph with " + std::to_string(tg.num_steps()) + " steps");

  std::vector<Matrix<float>> mats(steps, Matrix<float>(tg.num_nodes(), dim));
  std::size_t read_rows = 0;
  while (read_rows < steps * rows && std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    const std::size_t step = read_rows / rows;
    const auto original = static_cast<std::int64_t>(read_rows % rows);
    std::istringstream ss(line);
    std::vector<float> vals;
    vals.reserve(dim);
    std::string tok;
    while (ss >> tok) {
      char* end = nullptr;
      float v = std::strtof(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw FormatError(detail::where(source, line_no) + "bad number '" + tok + "'");
      if (!std::isfinite(v)) throw FormatError(detail::where(source, line_no) + "non-finite feature value");
      vals.push_back(v);
    }
    if (vals.size() != dim)
      throw FormatError(detail::where(source, line_no) + "dimension mismatch, expected " +
                        std::to_string(dim) + " values, got " + std::to_string(vals.size()));
    if (auto idx = tg.index_of(original)) std::copy(vals.begin(), vals.end(), mats[step].row(*idx).begin());
    ++read_rows;
  }
  if (read_rows != steps * rows)
    throw FormatError(source + ": dimension mismatch, header promises " + std::to_string(steps * rows) +
                      " rows, found " + std::to_string(read_rows));
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::is_blank_or_comment(line))
      throw FormatError(detail::where(source, line_no) + "dimension mismatch, extra row after " +
                        std::to_string(steps * rows) + " rows");
  }
  return per_step ? FeatureStore::from_steps(std::move(mats)) : FeatureStore::from_static(std::move(mats[0]));
}

inline FeatureStore load_features(const std::filesystem::path& path, const TemporalGraph& tg) {
  auto in = detail::open_input(path);
  return parse_features(in, tg, path.string());
}

// Structural stand-in when no feature file is supplied: per step, a one-hot
// log2 bucket of the cumulative degree plus log1p of the delta degree.
inline FeatureStore degree_features(const TemporalGraph& tg, std::size_t buckets = 16) {
  std::vector<Matrix<float>> mats;
  for (std::size_t t = 0; t < tg.num_steps(); ++t) {
    Matrix<float> m(tg.num_nodes(), buckets + 1);
    for (NodeId v = 0; v < tg.num_nodes(); ++v) {
      auto deg = static_cast<double>(tg.snapshot(t).degree(v));
      auto b = std::min<std::size_t>(buckets - 1, static_cast<std::size_t>(std::log2(1.0 + deg)));
      m(v, b) = 1.0f;
      m(v, buckets) = static_cast<float>(std::log1p(static_cast<double>(tg.delta(t).degree(v))));
    }
    mats.push_back(std::move(m));
  }
  return FeatureStore::from_steps(std::move(mats));
}

inline void write_node_ids(const TemporalGraph& tg, std::ostream& out) {
  out << "# dense_id original_id\n";
  for (std::size_t i = 0; i < tg.num_nodes(); ++i) out << i << ' ' << tg.node_ids()[i] << '\n';
}

}  // namespace spikenet
