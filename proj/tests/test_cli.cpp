#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "spikenet/commands.hpp"

using namespace spikenet;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("spikenet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small dataset plus a short training run shared by several tests.
std::vector<std::string> small_train_args(const fs::path& data, const fs::path& out) {
  return {"train",        "--config", (data / "config.txt").string(), "--out_dir", out.string(),
          "--hidden",     "8,8",      "--d_emb",                      "8",         "--epochs",
          "3",            "--batch_size", "32",                       "--lr",      "0.01",
          "--strict_deterministic", "true"};
}

fs::path make_dataset(const std::string& name) {
  auto dir = scratch(name);
  auto r = cli({"gen-synthetic", "--out", (dir / "data").string(), "--nodes", "60", "--steps", "4", "--p-intra",
                "0.1", "--seed", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  return dir;
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"train", "--help"}).code, 0);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"eval"}).code, 2);  // --checkpoint is required
  EXPECT_EQ(cli({"train", "--epochs", "x"}).code, 2);
}

TEST(Cli, MissingEdgeFileNamesPath) {
  auto r = cli({"train", "--edges", "/nonexistent/edges.txt", "--labels", "/nonexistent/labels.txt"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/edges.txt"), std::string::npos) << r.err;
}

TEST(Cli, UnknownSetKeyIsInputError) {
  auto dir = make_dataset("setkey");
  auto r = cli({"train", "--config", (dir / "data/config.txt").string(), "--set", "bogus=1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST(Cli, TrainThenEvalReproducesTestScores) {
  auto dir = make_dataset("train");
  auto out = dir / "run";
  auto r = cli(small_train_args(dir / "data", out));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"model.spkn", "metrics.jsonl", "resolved_config.txt", "node_ids.txt"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  auto fin = nlohmann::json::parse(r.out);
  EXPECT_EQ(fin["event"], "final");

  std::istringstream log(slurp(out / "metrics.jsonl"));
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(log, line)) records.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(records.size(), 4u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(records[i]["epoch"], i + 1);
    for (const char* key : {"train_loss", "val_loss", "val_macro_f1", "val_micro_f1", "firing_rate"})
      EXPECT_TRUE(records[i][key].is_number()) << key;
    EXPECT_TRUE(records[i]["wall_seconds"].is_null());
  }

  auto ev = cli({"eval", "--checkpoint", (out / "model.spkn").string(), "--split", "test"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  auto scores = nlohmann::json::parse(ev.out);
  EXPECT_EQ(scores["micro_f1"], fin["test_micro_f1"]);
  EXPECT_EQ(scores["macro_f1"], fin["test_macro_f1"]);
  EXPECT_EQ(scores["count"], fin["test_count"]);

  auto fr = cli({"firing-rate", "--checkpoint", (out / "model.spkn").string(), "--split", "all", "--intervals", "2"});
  ASSERT_EQ(fr.code, 0) << fr.err;
  auto rates = nlohmann::json::parse(fr.out);
  EXPECT_EQ(rates["per_step"].size(), 4u);
  EXPECT_EQ(rates["per_interval"].size(), 2u);
  EXPECT_GE(rates["overall"].get<double>(), 0.0);
  EXPECT_LE(rates["overall"].get<double>(), 1.0);

  EXPECT_EQ(cli({"eval", "--checkpoint", (out / "model.spkn").string(), "--split", "nope"}).code, 2);
}

TEST(Cli, CorruptCheckpointIsFormatError) {
  auto dir = make_dataset("corrupt");
  auto out = dir / "run";
  ASSERT_EQ(cli(small_train_args(dir / "data", out)).code, 0);
  {
    std::fstream f(out / "model.spkn", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  auto r = cli({"eval", "--checkpoint", (out / "model.spkn").string()});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, CheckpointDimensionMismatchIsFormatError) {
  auto dir = make_dataset("dims");
  auto out = dir / "run";
  ASSERT_EQ(cli(small_train_args(dir / "data", out)).code, 0);
  auto r = cli({"eval", "--checkpoint", (out / "model.spkn").string(), "--hidden", "9,8"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("layer1"), std::string::npos) << r.err;
}

TEST(Cli, FeatureDimensionMismatchIsFormatError) {
  auto dir = make_dataset("featdim");
  auto out = dir / "run";
  ASSERT_EQ(cli(small_train_args(dir / "data", out)).code, 0);
  {
    std::ofstream f(dir / "wide_features.txt");
    f << "60 3\n";
    for (int v = 0; v < 60; ++v) f << "0.5 0.25 1\n";
  }
  auto r = cli({"eval", "--checkpoint", (out / "model.spkn").string(), "--features",
                (dir / "wide_features.txt").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("layer1"), std::string::npos) << r.err;

  std::ofstream(dir / "ragged.txt") << "60 2\n1 2\n3 4 5\n";
  EXPECT_EQ(cli({"train", "--config", (dir / "data/config.txt").string(), "--features", (dir / "ragged.txt").string(),
                 "--epochs", "1"})
                .code,
            3);
}

TEST(Cli, ZeroEpochsWritesInitialModel) {
  auto dir = make_dataset("zero");
  auto args = small_train_args(dir / "data", dir / "run");
  args[10] = "0";  // --epochs value
  ASSERT_EQ(args[9], "--epochs");
  auto r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["best_epoch"], 0);
  EXPECT_TRUE(fs::exists(dir / "run/model.spkn"));
}

TEST(Cli, DivergentTrainingIsNumericError) {
  auto dir = make_dataset("diverge");
  auto args = small_train_args(dir / "data", dir / "run");
  args[14] = "1e38";
  ASSERT_EQ(args[13], "--lr");
  args[10] = "10";
  EXPECT_EQ(cli(args).code, 4);
}

TEST(Cli, GenSyntheticIsByteIdenticalAndLoadsCleanly) {
  auto a = scratch("synth_a"), b = scratch("synth_b");
  for (const auto& d : {a, b}) ASSERT_EQ(cli({"gen-synthetic", "--out", d.string(), "--seed", "11"}).code, 0);
  for (const char* f : {"edges.txt", "labels.txt", "features.txt", "config.txt"}) {
    EXPECT_FALSE(slurp(a / f).empty()) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  auto data = load_run_data(load_run_config(a / "config.txt"));
  EXPECT_TRUE(data.warnings.empty());
  EXPECT_EQ(data.graph.num_classes(), 4u);
  std::vector<int> counts(4);
  for (auto l : data.graph.labels()) ++counts[static_cast<std::size_t>(l)];
  for (int c : counts) EXPECT_EQ(c, 50);
}

TEST(Cli, NoSwitchingLabelsAreCommunities) {
  auto d = scratch("synth_static");
  ASSERT_EQ(cli({"gen-synthetic", "--out", d.string(), "--switch-fraction", "0", "--communities", "3", "--nodes", "30"}).code, 0);
  auto data = load_run_data(load_run_config(d / "config.txt"));
  EXPECT_EQ(data.graph.num_classes(), 3u);
  std::vector<int> counts(3);
  for (auto l : data.graph.labels()) ++counts[static_cast<std::size_t>(l)];
  EXPECT_EQ(counts, (std::vector<int>{10, 10, 10}));
  EXPECT_EQ(cli({"gen-synthetic", "--out", d.string(), "--switch-fraction", "2"}).code, 2);
}

TEST(Cli, BenchReportsEquivalenceAtExtremeDensities) {
  auto r = cli({"bench-masked-sum", "--dims", "8,16", "--densities", "0,1", "--repetitions", "3", "--warmup", "1",
                "--inner-loops", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line[0], '#');
  std::getline(in, line);
  EXPECT_EQ(line, "density,n,m,ns_masked,ns_dense,speedup,equivalent");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "true") << line;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(cli({"bench-masked-sum", "--densities", "1.5"}).code, 2);
}

TEST(FiringRate, Examples) {
  EXPECT_EQ(firing_report({1, 0, 0, 0}, {1, 1, 1, 1}).overall, 0.25);
  SpikeHistory<float> quiet(2, 3, 4), loud(2, 3, 4);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t t = 0; t < 3; ++t)
      for (auto& v : loud.at(b, t)) v = 1.0f;
  EXPECT_EQ(firing_rate<float>({quiet}).overall, 0.0);
  EXPECT_EQ(firing_rate<float>({loud}).overall, 1.0);
  auto rep = firing_report({2, 0, 4, 4}, {4, 4, 4, 4}, 2);
  EXPECT_EQ(rep.per_step, (std::vector<double>{0.5, 0.0, 1.0, 1.0}));
  EXPECT_EQ(rep.per_interval, (std::vector<double>{0.25, 1.0}));
  EXPECT_EQ(rep.overall, 10.0 / 16.0);
}

#ifdef SPIKENET_CLI_PATH
TEST(CliBinary, ExitCodes) {
  auto run = [](const std::string& args) {
    const int status = std::system((std::string(SPIKENET_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("train --edges /nonexistent/e.txt --labels /nonexistent/l.txt"), 2);
  auto dir = scratch("binary");
  {
    std::ofstream f(dir / "model.spkn");
    f << "NOPE";
  }
  ASSERT_EQ(run("gen-synthetic --out " + dir.string() + " --nodes 20 --steps 2"), 0);
  std::ofstream(dir / "resolved_config.txt") << slurp(dir / "config.txt");
  EXPECT_EQ(run("eval --checkpoint " + (dir / "model.spkn").string()), 3);
}
#endif
