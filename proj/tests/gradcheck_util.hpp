#pragma once

// Finite-difference checks of the full BPTT backward pass in double precision
// with relaxed (sigmoid) spikes, so the loss is differentiable everywhere.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "spikenet/train.hpp"

namespace spikenet::testing {

struct GradCase {
  TemporalGraph tg;
  ModelConfig cfg;
  SampleTree tree;
  std::vector<std::int32_t> targets;
};

struct GradCaseSpec {
  std::size_t nodes = 8;
  std::size_t steps = 3;
  std::size_t in_dim = 4;
  std::vector<std::size_t> hidden{6, 5};
  std::vector<std::size_t> fanouts{2, 2};
  std::size_t embed_dim = 7;
  std::size_t classes = 3;
  PoolMode pool = PoolMode::linear;
  std::uint64_t seed = 0;
};

inline GradCase make_grad_case(const GradCaseSpec& s) {
  SplitMix64 rng(s.seed);
  std::vector<TimedEdge> edges;
  for (std::size_t i = 0; i < 3 * s.nodes; ++i)
    edges.push_back({static_cast<NodeId>(rng() % s.nodes), static_cast<NodeId>(rng() % s.nodes), rng() % s.steps});
  auto tg = build_temporal_graph(s.nodes, s.steps, edges, SnapshotMode::cumulative);
  std::uniform_real_distribution<float> u(0.0f, 2.0f);
  std::vector<Matrix<float>> xs;
  for (std::size_t t = 0; t < s.steps; ++t) {
    Matrix<float> x(s.nodes, s.in_dim);
    for (auto& v : x.values()) v = u(rng);
    xs.push_back(std::move(x));
  }
  tg.set_features(FeatureStore::from_steps(std::move(xs)));
  std::vector<std::int32_t> labels(s.nodes);
  for (auto& l : labels) l = static_cast<std::int32_t>(rng() % s.classes);
  labels[0] = 0;
  labels[1] = static_cast<std::int32_t>(s.classes - 1);
  tg.set_labels(labels);

  GradCase c{std::move(tg), {}, {}, {}};
  c.cfg.in_dim = s.in_dim;
  c.cfg.hidden = s.hidden;
  c.cfg.embed_dim = s.embed_dim;
  c.cfg.num_classes = s.classes;
  c.cfg.num_steps = s.steps;
  c.cfg.pool = s.pool;
  c.cfg.fire = FireMode::relaxed;
  c.cfg.detach_threshold = false;
  LifParams lif;
  lif.tau_m = 2.0;  // keeps membrane memory in the gradient path
  c.cfg.lif = {lif};
  SamplerConfig sampler;
  sampler.fanouts = s.fanouts;
  sampler.seed = s.seed;
  std::vector<NodeId> roots(s.nodes);
  for (std::size_t i = 0; i < s.nodes; ++i) roots[i] = static_cast<NodeId>(i);
  c.tree = build_batch_tree(c.tg, roots, sampler, 1);
  c.targets = labels;
  return c;
}

inline double grad_case_loss(const GradCase& c, const ModelParams<double>& p) {
  ForwardTape<double> tape;
  return forward_loss(c.tg, c.tree, c.cfg, p, c.targets, tape, 1.0 / static_cast<double>(c.targets.size()));
}

inline ModelParams<double> analytic_grads(const GradCase& c, const ModelParams<double>& p) {
  ForwardTape<double> tape;
  forward_loss(c.tg, c.tree, c.cfg, p, c.targets, tape, 1.0 / static_cast<double>(c.targets.size()));
  auto g = ModelParams<double>::zeros(c.cfg);
  backward(tape, c.cfg, p, g);
  return g;
}

inline ModelParams<double> numeric_grads(const GradCase& c, ModelParams<double> p, double h) {
  auto g = ModelParams<double>::zeros(c.cfg);
  auto ps = p.tensors();
  auto gs = g.tensors();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto vals = ps[k].tensor->values();
    auto out = gs[k].tensor->values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double keep = vals[i];
      vals[i] = keep + h;
      const double up = grad_case_loss(c, p);
      vals[i] = keep - h;
      const double down = grad_case_loss(c, p);
      vals[i] = keep;
      out[i] = (up - down) / (2 * h);
    }
  }
  return g;
}

struct TensorError {
  std::string name;
  double rel = 0.0;
  double norm = 0.0;
};

// ||a - b|| / max(||a||, ||b||) per tensor.
inline std::vector<TensorError> relative_errors(ModelParams<double> a, ModelParams<double> b) {
  std::vector<TensorError> out;
  auto as = a.tensors();
  auto bs = b.tensors();
  for (std::size_t k = 0; k < as.size(); ++k) {
    auto x = as[k].tensor->values();
    auto y = bs[k].tensor->values();
    double diff = 0, nx = 0, ny = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      diff += (x[i] - y[i]) * (x[i] - y[i]);
      nx += x[i] * x[i];
      ny += y[i] * y[i];
    }
    const double scale = std::sqrt(std::max(nx, ny));
    out.push_back({as[k].name, scale > 0 ? std::sqrt(diff) / scale : std::sqrt(diff), scale});
  }
  return out;
}

}  // namespace spikenet::testing
