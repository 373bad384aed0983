#pragma once

// Experiment artifacts: curve.csv, runs.csv, traces.jsonl, manifest.cfg and
// one JSON checkpoint per run. Nothing time-dependent is written, so
// re-running a manifest reproduces the files byte for byte.

#include <filesystem>
#include <string>
#include <vector>

#include "qpamdp/bench/experiment.hpp"

namespace qpamdp::bench {

namespace fs = std::filesystem;

inline constexpr const char* kCurveHeader = "episodes,mean,stderr";
inline constexpr const char* kRunsHeader = "run,seed,iteration,episodes,success,mean_return,stderr";

std::string curve_csv(const AggregateCurve& curve);
AggregateCurve parse_curve_csv(const std::string& text);
AggregateCurve read_curve_csv(const fs::path& path);

std::string runs_csv(const std::vector<RunRecord>& records);
// Curves of every run in a runs.csv, ordered by run index.
std::vector<LearningCurve> parse_runs_csv(const std::string& text, const std::string& source = "<runs.csv>");
std::vector<LearningCurve> read_runs_csv(const fs::path& path);

// One JSON object (single line) describing an episode.
std::string episode_json(const Episode& episode, int run, int episode_index);

struct Checkpoint {
  ExperimentConfig config;
  int run = 0;
  std::uint64_t seed = 0;
  CompositePolicy policy;
};

std::string checkpoint_json(const ExperimentConfig& cfg, const RunRecord& record);
Checkpoint parse_checkpoint(const std::string& text);
Checkpoint load_checkpoint(const fs::path& path);

// Rollouts of a checkpointed policy.
std::vector<Episode> trace_checkpoint(const Checkpoint& ckpt, int episodes, std::uint64_t seed);

// Final-policy episodes exported for a run (trace.episodes of them).
std::vector<Episode> final_traces(const ExperimentConfig& cfg, const RunRecord& record);

// Writes every artifact into out_dir (created if needed); returns the paths.
std::vector<fs::path> emit_outputs(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                                   const AggregateCurve& aggregate, const fs::path& out_dir);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace qpamdp::bench
