#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikenet/bench.hpp"
#include "spikenet/checkpoint.hpp"
#include "spikenet/config.hpp"
#include "spikenet/error.hpp"
#include "spikenet/firing.hpp"
#include "spikenet/synth.hpp"
#include "spikenet/train.hpp"

namespace spikenet {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// SPIKENET_LOG = quiet | info | debug (default info).
inline LogLevel log_level_from_env() {
  const char* v = std::getenv("SPIKENET_LOG");
  if (!v) return LogLevel::info;
  const std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::quiet;
  if (s == "debug" || s == "2") return LogLevel::debug;
  return LogLevel::info;
}

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int input = 2;
inline constexpr int format = 3;
inline constexpr int numeric = 4;
}  // namespace exit_code

namespace detail {

struct Cli {
  std::ostream& out;
  std::ostream& err;
  LogLevel level;

  void info(const std::string& msg) const {
    if (level >= LogLevel::info) err << "[info] " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level >= LogLevel::debug) err << "[debug] " << msg << '\n';
  }
  void warn(const std::string& msg) const {
    if (level >= LogLevel::info) err << "[warn] " << msg << '\n';
  }
};

// Config file plus overrides; `--key value` flags are applied first, then
// `--set key=value` in the order given.
struct ConfigArgs {
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::vector<std::string> sets;

  void attach(CLI::App& app, bool config_required) {
    auto* c = app.add_option("--config,-c", config_path, "key = value run configuration");
    if (config_required) c->required();
    for (const auto& key : RunConfig::keys()) app.add_option("--" + key, flags[key], "override '" + key + "'");
    app.add_option("--set", sets, "override as key=value (repeatable)");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    for (const auto& [key, value] : flags)
      if (!value.empty()) cfg.set(key, value);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
      cfg.set(trim(kv.substr(0, eq)), kv.substr(eq + 1));
    }
    // The snapshot must stay valid wherever it is read from.
    auto absolute = [](std::string& p) {
      if (!p.empty()) p = std::filesystem::absolute(p).lexically_normal().string();
    };
    absolute(cfg.edges);
    absolute(cfg.labels);
    absolute(cfg.features);
    absolute(cfg.out_dir);
    cfg.validate();
    return cfg;
  }
};

inline nlohmann::json scores_json(const EvalResult& r) {
  return {{"macro_f1", r.macro_f1}, {"micro_f1", r.micro_f1}, {"loss", r.loss}, {"count", r.count}};
}

inline std::vector<NodeId> split_nodes(const Split& s, const std::string& which, std::size_t num_nodes,
                                       std::span<const std::int32_t> labels) {
  if (which == "train") return s.train;
  if (which == "val") return s.val;
  if (which == "test") return s.test;
  if (which == "all") {
    std::vector<NodeId> all;
    for (std::size_t v = 0; v < num_nodes; ++v)
      if (labels[v] >= 0) all.push_back(static_cast<NodeId>(v));
    return all;
  }
  throw InputError("unknown split '" + which + "' (train, val, test, all)");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

struct LoadedModel {
  RunConfig run;
  LoadedData data;
  ModelConfig model;
  ModelParams<float> params;
  Split split;
};

inline LoadedModel load_model(const Cli& cli, const std::string& checkpoint, ConfigArgs args) {
  if (args.config_path.empty()) {
    const auto guess = std::filesystem::path(checkpoint).parent_path() / "resolved_config.txt";
    if (!std::filesystem::exists(guess))
      throw InputError("no --config given and '" + guess.string() + "' does not exist");
    args.config_path = guess.string();
  }
  LoadedModel m;
  m.run = args.resolve();
  m.data = load_run_data(m.run);
  for (const auto& w : m.data.warnings) cli.warn(w);
  m.model = m.run.model(m.data.graph);
  m.model.validate();
  m.params = load_checkpoint(checkpoint, m.model);
  m.split = stratified_split(m.data.graph.labels(), m.run.training().split, m.run.seed);
  return m;
}

inline int cmd_train(const Cli& cli, const ConfigArgs& args) {
  const RunConfig run = args.resolve();
  auto data = load_run_data(run);
  for (const auto& w : data.warnings) cli.warn(w);
  const TemporalGraph& tg = data.graph;
  const ModelConfig model = run.model(tg);
  model.validate();
  const auto sampler = run.sampler();
  const auto tc = run.training();

  const std::filesystem::path out_dir = run.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  write_text(out_dir / "resolved_config.txt", run.to_text());
  {
    std::ofstream ids(out_dir / "node_ids.txt");
    if (!ids) throw InputError("cannot write node id map in '" + out_dir.string() + "'");
    write_node_ids(tg, ids);
  }
  std::ofstream metrics(out_dir / "metrics.jsonl");
  if (!metrics) throw InputError("cannot write metrics log in '" + out_dir.string() + "'");

  cli.info("nodes " + std::to_string(tg.num_nodes()) + ", steps " + std::to_string(tg.num_steps()) +
           ", classes " + std::to_string(model.num_classes) + ", feature dim " + std::to_string(model.in_dim));
  auto params = ModelParams<float>::init(model, run.seed);
  const auto on_epoch = [&](const EpochRecord& r) {
    nlohmann::json j{{"epoch", r.epoch},
                     {"train_loss", r.train_loss},
                     {"val_loss", r.val.loss},
                     {"val_macro_f1", r.val.macro_f1},
                     {"val_micro_f1", r.val.micro_f1},
                     {"firing_rate", r.firing_rate}};
    // Timing is the only nondeterministic field; strict runs leave it out.
    j["wall_seconds"] = run.strict_deterministic ? nlohmann::json(nullptr) : nlohmann::json(r.wall_seconds);
    metrics << j.dump() << '\n' << std::flush;
    cli.debug(j.dump());
  };
  auto result = train<float>(tg, model, sampler, tc, std::move(params), on_epoch);

  nlohmann::json fin{{"event", "final"},
                     {"best_epoch", result.best_epoch},
                     {"val_macro_f1", result.best_val.macro_f1},
                     {"val_micro_f1", result.best_val.micro_f1},
                     {"val_loss", result.best_val.loss},
                     {"test_macro_f1", result.test.macro_f1},
                     {"test_micro_f1", result.test.micro_f1},
                     {"test_loss", result.test.loss},
                     {"test_count", result.test.count},
                     {"param_count", param_count(result.params)}};
  metrics << fin.dump() << '\n';
  save_checkpoint(out_dir / "model.spkn", result.params);
  cli.out << fin.dump() << '\n';
  cli.info("wrote " + (out_dir / "model.spkn").string());
  return exit_code::ok;
}

inline int cmd_eval(const Cli& cli, const std::string& checkpoint, const ConfigArgs& args,
                    const std::string& which) {
  auto m = load_model(cli, checkpoint, args);
  const auto& tg = m.data.graph;
  const auto nodes = split_nodes(m.split, which, tg.num_nodes(), tg.labels());
  const auto r = evaluate(tg, m.model, m.run.sampler(), m.params, std::span<const NodeId>(nodes),
                          m.run.batch_size, m.run.training().worker_count());
  nlohmann::json j = scores_json(r);
  j["split"] = which;
  cli.out << j.dump() << '\n';
  return exit_code::ok;
}

inline int cmd_firing_rate(const Cli& cli, const std::string& checkpoint, const ConfigArgs& args,
                           const std::string& which, std::size_t intervals) {
  auto m = load_model(cli, checkpoint, args);
  const auto& tg = m.data.graph;
  const auto nodes = split_nodes(m.split, which, tg.num_nodes(), tg.labels());
  FiringStats stats;
  evaluate(tg, m.model, m.run.sampler(), m.params, std::span<const NodeId>(nodes), m.run.batch_size,
           m.run.training().worker_count(), &stats);
  const auto rep = firing_report(stats, intervals);
  nlohmann::json j{{"split", which},
                   {"overall", rep.overall},
                   {"per_step", rep.per_step},
                   {"per_interval", rep.per_interval}};
  cli.out << j.dump() << '\n';
  return exit_code::ok;
}

inline int cmd_gen_synthetic(const Cli& cli, const SynthSpec& spec, const std::string& out_dir) {
  const auto data = generate_synthetic(spec);
  write_synthetic(data, out_dir);
  cli.info("wrote synthetic dataset (" + std::to_string(data.edges.size()) + " timed edges) to " + out_dir);
  return exit_code::ok;
}

inline int cmd_bench(const Cli& cli, const BenchConfig& cfg, const std::string& out_path) {
  const auto rows = bench_masked_sum(cfg);
  if (out_path.empty()) {
    write_bench_csv(rows, cfg, cli.out);
  } else {
    std::ofstream f(out_path);
    if (!f) throw InputError("cannot write '" + out_path + "'");
    write_bench_csv(rows, cfg, f);
  }
  for (const auto& r : rows)
    if (!r.equivalent)
      throw NumericError("masked_sum disagrees with the dense product at n=" + std::to_string(r.n) +
                         " density=" + std::to_string(r.density));
  return exit_code::ok;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  const detail::Cli cli{out, err, log_level_from_env()};
  CLI::App app{"Spiking temporal graph node classification", "spikenet"};
  app.require_subcommand(1);

  detail::ConfigArgs train_args, eval_args, firing_args;
  auto* train_cmd = app.add_subcommand("train", "train a model; writes metrics, checkpoint and config snapshot");
  train_args.attach(*train_cmd, false);

  std::string checkpoint, which = "test";
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  eval_cmd->add_option("--checkpoint", checkpoint, "model.spkn written by train")->required();
  eval_cmd->add_option("--split", which, "train, val, test or all");
  eval_args.attach(*eval_cmd, false);

  std::size_t intervals = 1;
  std::string firing_checkpoint, firing_split = "test";
  auto* firing_cmd = app.add_subcommand("firing-rate", "report spike firing rates of a checkpoint");
  firing_cmd->add_option("--checkpoint", firing_checkpoint, "model.spkn written by train")->required();
  firing_cmd->add_option("--split", firing_split, "train, val, test or all");
  firing_cmd->add_option("--intervals", intervals, "number of equal-width step intervals");
  firing_args.attach(*firing_cmd, false);

  SynthSpec synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("gen-synthetic", "write a dynamic SBM dataset");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--nodes", synth.num_nodes);
  synth_cmd->add_option("--steps", synth.num_steps);
  synth_cmd->add_option("--communities", synth.num_communities);
  synth_cmd->add_option("--switch-fraction", synth.switch_fraction);
  synth_cmd->add_option("--p-intra", synth.p_intra);
  synth_cmd->add_option("--p-inter", synth.p_inter);
  synth_cmd->add_option("--noise", synth.noise);
  synth_cmd->add_option("--seed", synth.seed);

  BenchConfig bench;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench-masked-sum", "time masked_sum against the dense product");
  bench_cmd->add_option("--dims", bench.dims)->delimiter(',');
  bench_cmd->add_option("--densities", bench.densities)->delimiter(',');
  bench_cmd->add_option("--repetitions", bench.repetitions);
  bench_cmd->add_option("--warmup", bench.warmup);
  bench_cmd->add_option("--inner-loops", bench.inner_loops);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::input;
  }

  try {
    if (*train_cmd) return detail::cmd_train(cli, train_args);
    if (*eval_cmd) return detail::cmd_eval(cli, checkpoint, eval_args, which);
    if (*firing_cmd) return detail::cmd_firing_rate(cli, firing_checkpoint, firing_args, firing_split, intervals);
    if (*synth_cmd) return detail::cmd_gen_synthetic(cli, synth, synth_out);
    if (*bench_cmd) return detail::cmd_bench(cli, bench, bench_out);
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return exit_code::format;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_code::numeric;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return exit_code::input;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return exit_code::input;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return exit_code::input;
  }
  return exit_code::input;
}

}  // namespace spikenet
