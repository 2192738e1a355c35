#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

#include "spikenet/rng.hpp"
#include "spikenet/tgraph.hpp"

using namespace spikenet;

namespace {

using EdgeSet = std::set<std::pair<NodeId, NodeId>>;

EdgeSet edge_set(const SnapshotGraph& g) {
  EdgeSet s;
  for (auto [u, v] : g.edges()) s.insert({u, v});
  return s;
}

TemporalGraph parse(const std::string& text, std::size_t bins, SnapshotMode mode = SnapshotMode::cumulative,
                    std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  EdgeStreamOptions opts;
  opts.num_bins = bins;
  opts.mode = mode;
  return parse_edge_stream(in, opts, warnings);
}

void expect_csr_invariants(const SnapshotGraph& g) {
  const auto& off = g.offsets();
  const auto& tgt = g.targets();
  ASSERT_EQ(off.size(), g.num_nodes() + 1);
  EXPECT_EQ(off.back(), tgt.size());
  for (std::size_t i = 0; i + 1 < off.size(); ++i) EXPECT_LE(off[i], off[i + 1]);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto nb = g.neighbors(v);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end()) << "duplicate neighbor";
    for (NodeId u : nb) {
      EXPECT_LT(u, g.num_nodes());
      EXPECT_NE(u, v);
      EXPECT_TRUE(g.has_edge(u, v)) << "asymmetric edge " << u << "-" << v;
    }
  }
}

// Random timed edge stream over n nodes with integer timestamps in [0, span).
std::vector<TimedEdge> random_stream(SplitMix64& rng, std::size_t n, std::size_t count, std::size_t steps) {
  std::vector<TimedEdge> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back({static_cast<NodeId>(rng() % n), static_cast<NodeId>(rng() % n), static_cast<std::size_t>(rng() % steps)});
  return out;
}

}  // namespace

TEST(SnapshotGraph, SymmetricSortedDeduplicated) {
  std::vector<Edge> edges{{2, 0}, {0, 2}, {1, 1}, {0, 1}, {3, 1}, {0, 1}};
  auto g = SnapshotGraph::from_edges(5, edges);
  expect_csr_invariants(g);
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_EQ(edge_set(g), (EdgeSet{{0, 1}, {0, 2}, {1, 3}}));
  EXPECT_EQ(g.degree(4), 0u);
}

TEST(SnapshotGraph, NeighborsExamples) {
  std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  auto g = SnapshotGraph::from_edges(6, star);
  auto nb = g.neighbors(0);
  EXPECT_EQ(std::vector<NodeId>(nb.begin(), nb.end()), (std::vector<NodeId>{1, 2, 3, 4}));
  EXPECT_TRUE(g.neighbors(5).empty());

  std::vector<Edge> path{{0, 1}, {1, 2}};
  auto p = SnapshotGraph::from_edges(3, path);
  auto mid = p.neighbors(1);
  EXPECT_EQ(std::vector<NodeId>(mid.begin(), mid.end()), (std::vector<NodeId>{0, 2}));
  EXPECT_THROW(p.neighbors(3), std::out_of_range);
}

TEST(EdgeStream, TwoBinsSplitTheRange) {
  auto tg = parse("0 1 0\n1 2 9\n", 2);
  ASSERT_EQ(tg.num_steps(), 2u);
  EXPECT_EQ(edge_set(tg.snapshot(0)), (EdgeSet{{0, 1}}));
  EXPECT_EQ(edge_set(tg.snapshot(1)), (EdgeSet{{0, 1}, {1, 2}}));
  EXPECT_EQ(edge_set(tg.delta(1)), (EdgeSet{{1, 2}}));
  EXPECT_EQ(edge_set(tg.delta(0)), edge_set(tg.snapshot(0)));
}

TEST(EdgeStream, SingleTimestampFillsFirstBin) {
  std::vector<std::string> warnings;
  auto tg = parse("0 1 5\n1 2 5\n2 3 5\n", 3, SnapshotMode::cumulative, &warnings);
  EXPECT_EQ(edge_set(tg.snapshot(0)), edge_set(tg.snapshot(1)));
  EXPECT_EQ(edge_set(tg.snapshot(1)), edge_set(tg.snapshot(2)));
  EXPECT_EQ(tg.delta(1).num_edges(), 0u);
  EXPECT_EQ(tg.delta(2).num_edges(), 0u);
  EXPECT_EQ(warnings.size(), 1u) << "more bins than distinct timestamps should warn";
}

TEST(EdgeStream, WindowedKeepsOnlyBinEdges) {
  auto tg = parse("0 1 0\n1 2 9\n", 2, SnapshotMode::windowed);
  EXPECT_EQ(edge_set(tg.snapshot(1)), (EdgeSet{{1, 2}}));
  EXPECT_EQ(edge_set(tg.delta(1)), (EdgeSet{{1, 2}}));
}

TEST(EdgeStream, UnchangedSnapshotHasEmptyDelta) {
  auto tg = parse("0 1 0\n0 1 5\n1 2 10\n", 3);
  // (0,1) re-established at step 1 is not new.
  EXPECT_EQ(tg.delta(1).num_edges(), 0u);
  EXPECT_EQ(edge_set(tg.delta(2)), (EdgeSet{{1, 2}}));
}

TEST(EdgeStream, DeltaOutOfRangeThrows) {
  auto tg = parse("0 1 0\n", 2);
  EXPECT_THROW(tg.delta(2), std::out_of_range);
  EXPECT_THROW(tg.snapshot(7), std::out_of_range);
}

TEST(EdgeStream, RemapsIdsDenselyInSortedOrder) {
  auto tg = parse("# comment\n100 7 0\n\n7 42 1\n", 1);
  EXPECT_EQ(tg.num_nodes(), 3u);
  EXPECT_EQ(tg.node_ids(), (std::vector<std::int64_t>{7, 42, 100}));
  EXPECT_EQ(tg.index_of(100), NodeId{2});
  EXPECT_FALSE(tg.index_of(8).has_value());
  EXPECT_EQ(edge_set(tg.snapshot(0)), (EdgeSet{{0, 1}, {0, 2}}));
}

TEST(EdgeStream, MalformedLineReportsLineNumber) {
  try {
    parse("0 1 0\n0 x 1\n", 1);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("0 1 0 4\n", 1), FormatError);
  EXPECT_THROW(parse("0 1 nan\n", 1), FormatError);
}

TEST(EdgeStream, EmptyFileIsInputError) {
  EXPECT_THROW(parse("", 1), InputError);
  EXPECT_THROW(parse("# only comments\n", 1), InputError);
  EXPECT_THROW(parse("0 1 0\n", 0), InputError);
}

TEST(EdgeStream, SelfLoopsDroppedWithWarning) {
  std::vector<std::string> warnings;
  auto tg = parse("0 0 0\n0 1 1\n", 2, SnapshotMode::cumulative, &warnings);
  EXPECT_EQ(tg.snapshot(1).num_edges(), 1u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(EdgeStream, MissingFileIsInputErrorNamingPath) {
  try {
    load_edge_stream("/nonexistent/edges.txt", {});
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/edges.txt"), std::string::npos);
  }
}

TEST(TimeBin, EqualWidthAndClamped) {
  EXPECT_EQ(time_bin(0.0, 0.0, 9.0, 2), 0u);
  EXPECT_EQ(time_bin(4.4, 0.0, 9.0, 2), 0u);
  EXPECT_EQ(time_bin(4.5, 0.0, 9.0, 2), 1u);
  EXPECT_EQ(time_bin(9.0, 0.0, 9.0, 2), 1u);
  EXPECT_EQ(time_bin(3.0, 3.0, 3.0, 5), 0u);
  // Integer steps 0..T-1 map onto themselves.
  for (std::size_t t = 0; t < 8; ++t) EXPECT_EQ(time_bin(static_cast<double>(t), 0.0, 7.0, 8), t);
}

// Cumulative invariants on random streams, checked exhaustively.
TEST(TemporalGraphProperty, CumulativeNestingAndDeltaUnion) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const std::size_t steps = 1 + rng() % 6;
    auto stream = random_stream(rng, n, rng() % 1000, steps);
    auto tg = build_temporal_graph(n, steps, stream, SnapshotMode::cumulative);
    EdgeSet united;
    for (std::size_t t = 0; t < steps; ++t) {
      expect_csr_invariants(tg.snapshot(t));
      expect_csr_invariants(tg.delta(t));
      EXPECT_EQ(tg.snapshot(t).num_nodes(), n);
      EXPECT_EQ(tg.delta(t).num_nodes(), n);
      const auto snap = edge_set(tg.snapshot(t));
      if (t > 0) {
        const auto prev = edge_set(tg.snapshot(t - 1));
        EXPECT_TRUE(std::includes(snap.begin(), snap.end(), prev.begin(), prev.end()));
        for (const auto& e : edge_set(tg.delta(t))) {
          EXPECT_TRUE(snap.count(e));
          EXPECT_FALSE(prev.count(e));
        }
      } else {
        EXPECT_EQ(edge_set(tg.delta(0)), snap);
      }
      const auto d = edge_set(tg.delta(t));
      united.insert(d.begin(), d.end());
      EXPECT_EQ(united, snap);
    }
  }
}

TEST(TemporalGraphProperty, WriteReloadRoundTrip) {
  SplitMix64 rng(5);
  for (auto mode : {SnapshotMode::cumulative, SnapshotMode::windowed}) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 3 + rng() % 20;
      const std::size_t steps = 2 + rng() % 5;
      auto stream = random_stream(rng, n, 1 + rng() % 200, steps);
      // Keep every node present so the dense remap is the identity.
      for (NodeId v = 0; v + 1 < n; ++v) stream.push_back({v, v + 1, 0});
      auto tg = build_temporal_graph(n, steps, stream, mode);
      std::stringstream buf;
      write_edge_stream(tg, buf);
      EdgeStreamOptions opts;
      opts.num_bins = steps;
      opts.mode = mode;
      opts.t_min = 0.0;
      opts.t_max = static_cast<double>(steps - 1);
      auto back = parse_edge_stream(buf, opts);
      ASSERT_EQ(back.num_steps(), steps);
      for (std::size_t t = 0; t < steps; ++t) {
        EXPECT_EQ(back.snapshot(t), tg.snapshot(t));
        EXPECT_EQ(back.delta(t), tg.delta(t));
      }
    }
  }
}

TEST(Labels, DenseAndSentinel) {
  auto tg = parse("10 20 0\n20 30 1\n", 2);
  std::istringstream all("10 0\n20 1\n30 2\n");
  EXPECT_EQ(parse_labels(all, tg), (std::vector<std::int32_t>{0, 1, 2}));
  std::istringstream partial("30 1\n");
  EXPECT_EQ(parse_labels(partial, tg), (std::vector<std::int32_t>{kUnlabeled, kUnlabeled, 1}));
}

TEST(Labels, Errors) {
  auto tg = parse("10 20 0\n", 1);
  std::istringstream unknown("11 0\n");
  EXPECT_THROW(parse_labels(unknown, tg), FormatError);
  std::istringstream bad("10\n");
  EXPECT_THROW(parse_labels(bad, tg), FormatError);
  std::istringstream conflict("10 0\n10 1\n");
  EXPECT_THROW(parse_labels(conflict, tg), FormatError);
  std::istringstream negative("10 -1\n");
  EXPECT_THROW(parse_labels(negative, tg), FormatError);
}

TEST(Features, StaticHeader) {
  auto tg = parse("0 1 0\n1 2 1\n", 2);
  std::istringstream in("3 2\n1 2\n3 4\n5 6\n");
  auto fs = parse_features(in, tg);
  EXPECT_EQ(fs.mode(), FeatureMode::static_features);
  EXPECT_EQ(fs.num_nodes(), 3u);
  EXPECT_EQ(fs.dim(), 2u);
  EXPECT_FLOAT_EQ(fs.row(0, 2)[1], 6.0f);
  EXPECT_FLOAT_EQ(fs.row(1, 2)[1], 6.0f) << "static features broadcast over steps";
}

TEST(Features, PerStepHeader) {
  auto tg = parse("0 1 0\n1 2 1\n", 2);
  std::istringstream in("2 3 1\n1\n2\n3\n4\n5\n6\n");
  auto fs = parse_features(in, tg);
  EXPECT_EQ(fs.mode(), FeatureMode::per_step);
  EXPECT_FLOAT_EQ(fs.row(0, 0)[0], 1.0f);
  EXPECT_FLOAT_EQ(fs.row(1, 2)[0], 6.0f);
}

TEST(Features, MissingRowsGetZerosAndUnknownRowsIgnored) {
  // Graph has original ids 1 and 3.
  auto tg = parse("1 3 0\n", 1);
  std::istringstream in("2 1\n7\n8\n");
  auto fs = parse_features(in, tg);
  EXPECT_FLOAT_EQ(fs.row(0, 0)[0], 8.0f);  // id 1
  EXPECT_FLOAT_EQ(fs.row(0, 1)[0], 0.0f);  // id 3 beyond N
}

TEST(Features, Errors) {
  auto tg = parse("0 1 0\n", 1);
  std::istringstream short_row("2 2\n1 2\n3\n");
  EXPECT_THROW(parse_features(short_row, tg), FormatError);
  std::istringstream too_few("2 1\n1\n");
  EXPECT_THROW(parse_features(too_few, tg), FormatError);
  std::istringstream extra("1 1\n1\n2\n");
  EXPECT_THROW(parse_features(extra, tg), FormatError);
  std::istringstream inf("2 1\n1\ninf\n");
  EXPECT_THROW(parse_features(inf, tg), FormatError);
  std::istringstream steps("3 2 1\n1\n2\n3\n4\n5\n6\n");
  EXPECT_THROW(parse_features(steps, tg), FormatError);
  std::istringstream header("x\n");
  EXPECT_THROW(parse_features(header, tg), FormatError);
}

TEST(Features, SetFeaturesValidatesShape) {
  auto tg = parse("0 1 0\n1 2 1\n", 2);
  EXPECT_THROW(tg.set_features(FeatureStore::zeros(4, 2)), FormatError);
  std::vector<Matrix<float>> three(3, Matrix<float>(3, 1));
  EXPECT_THROW(tg.set_features(FeatureStore::from_steps(three)), FormatError);
}

TEST(Features, DegreeFallbackShape) {
  auto tg = parse("0 1 0\n1 2 1\n", 2);
  auto fs = degree_features(tg);
  EXPECT_EQ(fs.num_steps(), 2u);
  EXPECT_EQ(fs.dim(), 17u);
  // Node 1 has degree 2 at step 1: bucket floor(log2 3) = 1, one new edge.
  EXPECT_FLOAT_EQ(fs.row(1, 1)[1], 1.0f);
  EXPECT_FLOAT_EQ(fs.row(1, 1)[16], static_cast<float>(std::log1p(1.0)));
}

TEST(TemporalGraph, FinalSnapshotOnly) {
  auto tg = parse("0 1 0\n1 2 1\n", 2, SnapshotMode::cumulative);
  std::vector<Matrix<float>> xs{Matrix<float>(3, 1, 1.0f), Matrix<float>(3, 1, 2.0f)};
  tg.set_features(FeatureStore::from_steps(xs));
  tg.set_labels({0, 1, 0});
  auto last = tg.final_snapshot_only();
  EXPECT_EQ(last.num_steps(), 1u);
  EXPECT_EQ(last.snapshot(0), tg.snapshot(1));
  EXPECT_FLOAT_EQ(last.features().row(0, 0)[0], 2.0f);
  EXPECT_EQ(last.num_classes(), 2u);
}
