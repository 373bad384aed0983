#pragma once

// Seeded multi-run execution and aggregation over runs.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpamdp/bench/config.hpp"

namespace qpamdp::bench {

struct RunRecord {
  int index = 0;
  std::uint64_t seed = 0;
  LearningCurve curve;
  std::optional<CompositePolicy> policy;  // final (theta, omega); empty on failure
  std::int64_t episodes_consumed = 0;
  double wall_seconds = 0.0;
  std::string error;  // non-empty when the run failed

  bool ok() const { return error.empty(); }
};

struct RunOptions {
  int parallel = 0;  // worker threads; 0 = hardware concurrency
  std::function<void(const RunRecord&)> on_done;  // called from the worker, serialized
};

// One run with seed cfg.seed + index, fresh environment and learner state.
RunRecord run_single(const ExperimentConfig& cfg, int index);

// cfg.runs independent runs; records come back ordered by index. A failing
// run is recorded and the others continue.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct AggregatePoint {
  std::int64_t episodes = 0;
  double mean = 0.0;
  double std_error = 0.0;  // stddev / sqrt(n), 0 for a single run
};

struct AggregateCurve {
  std::vector<AggregatePoint> points;
  int n_runs = 0;
};

// Pointwise mean and standard error of the success metric. Throws when the
// curves do not share one checkpoint grid.
AggregateCurve aggregate_curves(const std::vector<LearningCurve>& curves);
// Same over the successful records; throws if none succeeded.
AggregateCurve aggregate_runs(const std::vector<RunRecord>& records);

// Final-checkpoint success of each successful run.
std::vector<double> final_success(const std::vector<RunRecord>& records);

}  // namespace qpamdp::bench
