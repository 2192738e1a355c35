#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/net.hpp"
#include "spikenet/sampler.hpp"
#include "spikenet/tgraph.hpp"
#include "spikenet/train.hpp"

namespace spikenet {

// Everything a CLI run needs.
struct RunConfig {
  std::string edges;
  std::string labels;
  std::string features;  // empty: structural fallback features
  std::size_t t_bins = 10;
  SnapshotMode snapshot_mode = SnapshotMode::cumulative;
  bool final_snapshot_only = false;

  std::vector<std::size_t> fanouts{5, 3};
  double macro_fraction = 0.5;

  std::vector<std::size_t> hidden{128, 128};
  std::size_t d_emb = 128;
  PoolMode pooling = PoolMode::linear;
  LifParams lif;
  bool detach_threshold = true;

  std::size_t batch_size = 1024;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t epochs = 100;
  std::size_t patience = 20;
  double train_ratio = 0.75;
  double val_ratio = 0.05;
  double test_ratio = 0.20;
  std::uint64_t seed = 0;
  bool strict_deterministic = false;
  std::size_t threads = 1;

  std::string out_dir = "spikenet_run";

  static const std::vector<std::string>& keys();
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  std::string to_text() const {
    std::ostringstream out;
    for (const auto& k : keys()) out << k << " = " << get(k) << '\n';
    return out.str();
  }

  SamplerConfig sampler() const { return {fanouts, macro_fraction, seed}; }

  TrainConfig training() const {
    TrainConfig tc;
    tc.batch_size = batch_size;
    tc.optimizer.lr = lr;
    tc.optimizer.weight_decay = weight_decay;
    tc.epochs = epochs;
    tc.patience = patience;
    tc.split = {train_ratio, val_ratio, test_ratio};
    tc.seed = seed;
    tc.strict_deterministic = strict_deterministic;
    tc.threads = threads;
    return tc;
  }

  // Data-dependent dimensions come from the loaded graph.
  ModelConfig model(const TemporalGraph& tg) const {
    ModelConfig mc;
    mc.in_dim = tg.features().dim();
    mc.hidden = hidden;
    mc.embed_dim = d_emb;
    mc.num_classes = tg.num_classes();
    mc.num_steps = tg.num_steps();
    mc.pool = pooling;
    mc.lif = {lif};
    mc.detach_threshold = detach_threshold;
    return mc;
  }

  // Checks every data-independent precondition up front.
  void validate() const {
    if (t_bins == 0) throw InputError("config: t_bins must be >= 1");
    sampler().validate();
    training().validate();
    lif.validate();
    if (hidden.size() != fanouts.size())
      throw InputError("config: hidden has " + std::to_string(hidden.size()) + " layers but fanouts has " +
                       std::to_string(fanouts.size()));
    for (auto h : hidden)
      if (h == 0) throw InputError("config: hidden dims must be positive");
    if (pooling == PoolMode::linear && d_emb == 0) throw InputError("config: d_emb must be positive");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  std::from_chars_result r{};
  if constexpr (std::is_floating_point_v<N>) {
    // from_chars for doubles is missing on older toolchains.
    char* end = nullptr;
    out = static_cast<N>(std::strtod(value.c_str(), &end));
    r.ptr = end;
    r.ec = end == first ? std::errc::invalid_argument : std::errc{};
  } else {
    r = std::from_chars(first, last, out);
  }
  if (r.ec != std::errc{} || r.ptr != last || value.empty())
    throw InputError("config: bad value '" + value + "' for " + key);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError("config: bad boolean '" + value + "' for " + key);
}

inline std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(key, trim(item)));
  if (out.empty()) throw InputError("config: empty list for " + key);
  return out;
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace detail

inline const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "edges", "labels", "features", "t_bins", "snapshot_mode", "final_snapshot_only",
      "fanouts", "macro_fraction", "hidden", "d_emb", "pooling", "tau_m", "v_reset", "v_th0",
      "tau_th", "gamma", "alpha", "detach_threshold", "batch_size", "lr", "weight_decay",
      "epochs", "patience", "train_ratio", "val_ratio", "test_ratio", "seed",
      "strict_deterministic", "threads", "out_dir"};
  return k;
}

inline void RunConfig::set(const std::string& key, const std::string& raw) {
  using detail::parse_number;
  const std::string value = detail::trim(raw);
  if (key == "edges") edges = value;
  else if (key == "labels") labels = value;
  else if (key == "features") features = value;
  else if (key == "t_bins") t_bins = parse_number<std::size_t>(key, value);
  else if (key == "snapshot_mode") snapshot_mode = parse_snapshot_mode(value);
  else if (key == "final_snapshot_only") final_snapshot_only = detail::parse_bool(key, value);
  else if (key == "fanouts") fanouts = detail::parse_list(key, value);
  else if (key == "macro_fraction") macro_fraction = parse_number<double>(key, value);
  else if (key == "hidden") hidden = detail::parse_list(key, value);
  else if (key == "d_emb") d_emb = parse_number<std::size_t>(key, value);
  else if (key == "pooling") pooling = parse_pool_mode(value);
  else if (key == "tau_m") lif.tau_m = parse_number<double>(key, value);
  else if (key == "v_reset") lif.v_reset = parse_number<double>(key, value);
  else if (key == "v_th0") lif.v_th0 = parse_number<double>(key, value);
  else if (key == "tau_th") lif.tau_th = parse_number<double>(key, value);
  else if (key == "gamma") lif.gamma = parse_number<double>(key, value);
  else if (key == "alpha") lif.alpha = parse_number<double>(key, value);
  else if (key == "detach_threshold") detach_threshold = detail::parse_bool(key, value);
  else if (key == "batch_size") batch_size = parse_number<std::size_t>(key, value);
  else if (key == "lr") lr = parse_number<double>(key, value);
  else if (key == "weight_decay") weight_decay = parse_number<double>(key, value);
  else if (key == "epochs") epochs = parse_number<std::size_t>(key, value);
  else if (key == "patience") patience = parse_number<std::size_t>(key, value);
  else if (key == "train_ratio") train_ratio = parse_number<double>(key, value);
  else if (key == "val_ratio") val_ratio = parse_number<double>(key, value);
  else if (key == "test_ratio") test_ratio = parse_number<double>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "strict_deterministic") strict_deterministic = detail::parse_bool(key, value);
  else if (key == "threads") threads = parse_number<std::size_t>(key, value);
  else if (key == "out_dir") out_dir = value;
  else throw InputError("config: unknown key '" + key + "'");
}

inline std::string RunConfig::get(const std::string& key) const {
  using detail::fmt_double;
  if (key == "edges") return edges;
  if (key == "labels") return labels;
  if (key == "features") return features;
  if (key == "t_bins") return std::to_string(t_bins);
  if (key == "snapshot_mode") return to_string(snapshot_mode);
  if (key == "final_snapshot_only") return final_snapshot_only ? "true" : "false";
  if (key == "fanouts") return detail::join(fanouts);
  if (key == "macro_fraction") return fmt_double(macro_fraction);
  if (key == "hidden") return detail::join(hidden);
  if (key == "d_emb") return std::to_string(d_emb);
  if (key == "pooling") return to_string(pooling);
  if (key == "tau_m") return fmt_double(lif.tau_m);
  if (key == "v_reset") return fmt_double(lif.v_reset);
  if (key == "v_th0") return fmt_double(lif.v_th0);
  if (key == "tau_th") return fmt_double(lif.tau_th);
  if (key == "gamma") return fmt_double(lif.gamma);
  if (key == "alpha") return fmt_double(lif.alpha);
  if (key == "detach_threshold") return detach_threshold ? "true" : "false";
  if (key == "batch_size") return std::to_string(batch_size);
  if (key == "lr") return fmt_double(lr);
  if (key == "weight_decay") return fmt_double(weight_decay);
  if (key == "epochs") return std::to_string(epochs);
  if (key == "patience") return std::to_string(patience);
  if (key == "train_ratio") return fmt_double(train_ratio);
  if (key == "val_ratio") return fmt_double(val_ratio);
  if (key == "test_ratio") return fmt_double(test_ratio);
  if (key == "seed") return std::to_string(seed);
  if (key == "strict_deterministic") return strict_deterministic ? "true" : "false";
  if (key == "threads") return std::to_string(threads);
  if (key == "out_dir") return out_dir;
  throw InputError("config: unknown key '" + key + "'");
}

/// Parses `key = value` lines ('#' starts a comment line). Relative paths are
/// resolved against `base_dir` when it is given.
inline RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>",
                                  const std::filesystem::path& base_dir = {}) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InputError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(t.substr(0, eq));
    std::string value = detail::trim(t.substr(eq + 1));
    const bool is_path = key == "edges" || key == "labels" || key == "features" || key == "out_dir";
    if (is_path && !value.empty() && !base_dir.empty() && std::filesystem::path(value).is_relative())
      value = (base_dir / value).lexically_normal().string();
    cfg.set(key, value);
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  return parse_run_config(in, path.string(), path.parent_path());
}

struct LoadedData {
  TemporalGraph graph;
  std::vector<std::string> warnings;
};

/// Loads edges, labels and features named by the config.
inline LoadedData load_run_data(const RunConfig& cfg, bool require_labels = true) {
  if (cfg.edges.empty()) throw InputError("config: 'edges' path is required");
  LoadedData out;
  EdgeStreamOptions opts;
  opts.num_bins = cfg.t_bins;
  opts.mode = cfg.snapshot_mode;
  out.graph = load_edge_stream(cfg.edges, opts, &out.warnings);
  if (!cfg.labels.empty())
    out.graph.set_labels(load_labels(cfg.labels, out.graph));
  else if (require_labels)
    throw InputError("config: 'labels' path is required");
  if (!cfg.features.empty()) {
    out.graph.set_features(load_features(cfg.features, out.graph));
  } else {
    out.warnings.push_back("no feature file given; using degree-bucket features (structural stand-in only)");
    out.graph.set_features(degree_features(out.graph));
  }
  if (cfg.final_snapshot_only) out.graph = out.graph.final_snapshot_only();
  return out;
}

}  // namespace spikenet
