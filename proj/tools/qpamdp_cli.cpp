// qpamdp: run experiments, aggregate run files, replay checkpoints.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "qpamdp/bench/output.hpp"

using namespace qpamdp;
using namespace qpamdp::bench;

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::string>& out, const std::optional<std::uint64_t>& seed,
            const std::optional<int>& runs, int parallel) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (runs) cfg.runs = *runs;
  cfg.validate();
  const fs::path out_dir = out ? fs::path(*out) : fs::path("runs") / (cfg.env + "-" + method_name(cfg.method));

  std::cerr << "running " << cfg.runs << " x " << method_name(cfg.method) << " on " << cfg.env << "\n";
  RunOptions opts;
  opts.parallel = parallel;
  opts.on_done = [](const RunRecord& r) {
    if (r.ok()) {
      std::fprintf(stderr, "  run %d (seed %llu): final success %.4f after %lld episodes, %.1fs\n", r.index,
                   static_cast<unsigned long long>(r.seed), r.curve.empty() ? 0.0 : r.curve.points.back().success,
                   static_cast<long long>(r.episodes_consumed), r.wall_seconds);
    } else {
      std::fprintf(stderr, "  run %d (seed %llu): FAILED: %s\n", r.index, static_cast<unsigned long long>(r.seed),
                   r.error.c_str());
    }
  };
  const auto records = run_experiment(cfg, opts);

  int failed = 0;
  for (const auto& r : records) failed += r.ok() ? 0 : 1;
  if (failed == cfg.runs) {
    std::cerr << "every run failed; nothing written\n";
    return 1;
  }
  const AggregateCurve agg = aggregate_runs(records);
  const auto files = emit_outputs(cfg, records, agg, out_dir);
  const auto& last = agg.points.back();
  std::printf("%s %s: final success %s +- %s over %d runs (%d failed)\n", cfg.env.c_str(),
              method_name(cfg.method).c_str(), format_double(last.mean).c_str(), format_double(last.std_error).c_str(),
              agg.n_runs, failed);
  for (const auto& r : records) {
    if (!r.ok()) std::printf("  failed run %d (seed %llu): %s\n", r.index, static_cast<unsigned long long>(r.seed), r.error.c_str());
  }
  std::printf("wrote %zu files to %s\n", files.size(), out_dir.string().c_str());
  return 0;
}

int cmd_aggregate(const std::vector<std::string>& inputs, const std::optional<std::string>& out) {
  std::vector<LearningCurve> curves;
  for (const auto& p : inputs) {
    for (auto& c : read_runs_csv(p)) curves.push_back(std::move(c));
  }
  const std::string csv = curve_csv(aggregate_curves(curves));
  if (out) {
    write_text(*out, csv);
  } else {
    std::cout << csv;
  }
  return 0;
}

int cmd_trace(const std::string& checkpoint, int episodes, const std::optional<std::uint64_t>& seed,
              const std::optional<std::string>& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const auto eps = trace_checkpoint(ckpt, episodes, seed ? *seed : mix_seed(ckpt.seed, 0x7265706c6179ULL));
  std::string text;
  for (std::size_t e = 0; e < eps.size(); ++e) text += episode_json(eps[e], ckpt.run, static_cast<int>(e)) + "\n";
  if (out) {
    write_text(*out, text);
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-PAMDP experiment harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment described by a config file");
  std::string config_path;
  std::optional<std::string> run_out;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_runs;
  int parallel = 0;
  run->add_option("config", config_path, "config file (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "output directory (default runs/<env>-<method>)");
  run->add_option("--seed", run_seed, "base seed; run i uses seed + i");
  run->add_option("--runs", run_runs, "number of runs")->check(CLI::PositiveNumber);
  run->add_option("--parallel", parallel, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

  auto* agg = app.add_subcommand("aggregate", "mean and standard error over one or more runs.csv files");
  std::vector<std::string> agg_inputs;
  std::optional<std::string> agg_out;
  agg->add_option("runs", agg_inputs, "runs.csv files")->required()->check(CLI::ExistingFile);
  agg->add_option("--out", agg_out, "write curve.csv here instead of stdout");

  auto* trace = app.add_subcommand("trace", "roll out a checkpointed policy, one JSON episode per line");
  std::string ckpt_path;
  int episodes = 1;
  std::optional<std::uint64_t> trace_seed;
  std::optional<std::string> trace_out;
  trace->add_option("checkpoint", ckpt_path, "checkpoint JSON")->required()->check(CLI::ExistingFile);
  trace->add_option("--episodes", episodes, "episodes to roll out")->required()->check(CLI::PositiveNumber);
  trace->add_option("--seed", trace_seed, "rollout seed");
  trace->add_option("--out", trace_out, "write JSONL here instead of stdout");

  auto* defaults = app.add_subcommand("defaults", "print the default config of an environment");
  std::string env = "goal";
  std::string method = "qpamdp1";
  defaults->add_option("env", env, "toy, goal or platform")->required();
  defaults->add_option("--method", method, "qpamdp1, qpamdp-inf, enac-direct or fixed-sarsa");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, run_out, run_seed, run_runs, parallel);
    if (*agg) return cmd_aggregate(agg_inputs, agg_out);
    if (*trace) return cmd_trace(ckpt_path, episodes, trace_seed, trace_out);
    if (*defaults) {
      const auto m = parse_method(method);
      if (!m) throw Error("unknown method '" + method + "'");
      std::cout << default_config(env, *m).to_text();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
