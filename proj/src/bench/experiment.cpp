#include "qpamdp/bench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

namespace qpamdp::bench {

namespace {
constexpr std::uint64_t kEvalSalt = 0x6576616cULL;  // "eval"
}

RunRecord run_single(const ExperimentConfig& cfg, int index) {
  RunRecord rec;
  rec.index = index;
  rec.seed = cfg.seed + static_cast<std::uint64_t>(index);
  const auto start = std::chrono::steady_clock::now();
  try {
    cfg.validate();
    const envs::Domain domain = make_domain(cfg);
    const CompositePolicy initial = domain.initial_policy();

    EvaluationConfig ec;
    ec.episodes = cfg.eval_episodes;
    ec.gamma = cfg.qpamdp.enac.gamma;
    ec.max_steps = cfg.max_steps();
    ec.seed = mix_seed(rec.seed, kEvalSalt);
    ec.checkpoint_interval = cfg.checkpoint_interval;
    ec.max_episodes = cfg.max_episodes;
    TrainingMonitor monitor(*domain.env, ec);

    Rng rng(rec.seed);
    LearnerResult result = [&] {
      switch (cfg.method) {
        case Method::kQPamdp1:
        case Method::kQPamdpInf:
          return q_pamdp(*domain.env, initial, cfg.qpamdp, rng, &monitor);
        case Method::kEnacDirect:
          return direct_policy_search(*domain.env, initial, cfg.qpamdp.enac, cfg.iterations, rng, &monitor);
        case Method::kFixedSarsa:
          break;
      }
      return fixed_parameter_baseline(*domain.env, initial, cfg.qpamdp.sarsa, cfg.iterations, rng, &monitor);
    }();
    rec.curve = std::move(result.curve);
    rec.policy = std::move(result.policy);
    rec.episodes_consumed = result.episodes_consumed;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.policy.reset();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  std::vector<RunRecord> records(cfg.runs);
  int workers = options.parallel > 0 ? options.parallel : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, cfg.runs);

  std::atomic<int> next{0};
  std::mutex done_mutex;
  auto work = [&] {
    for (int i = next++; i < cfg.runs; i = next++) {
      records[i] = run_single(cfg, i);
      if (options.on_done) {
        std::lock_guard lock(done_mutex);
        options.on_done(records[i]);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return records;
}

AggregateCurve aggregate_curves(const std::vector<LearningCurve>& curves) {
  if (curves.empty()) throw Error("aggregate: no curves");
  const auto& grid = curves.front().points;
  for (std::size_t r = 1; r < curves.size(); ++r) {
    const auto& pts = curves[r].points;
    bool same = pts.size() == grid.size();
    for (std::size_t i = 0; same && i < pts.size(); ++i) same = pts[i].episodes == grid[i].episodes;
    if (!same) {
      throw Error("aggregate: run " + std::to_string(r) + " has a different checkpoint grid (" +
                  std::to_string(pts.size()) + " vs " + std::to_string(grid.size()) + " points)");
    }
  }
  AggregateCurve out;
  out.n_runs = static_cast<int>(curves.size());
  const double n = static_cast<double>(curves.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c.points[i].success;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c.points[i].success - mean) * (c.points[i].success - mean);
    const double se = curves.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    out.points.push_back({grid[i].episodes, mean, se});
  }
  return out;
}

AggregateCurve aggregate_runs(const std::vector<RunRecord>& records) {
  std::vector<LearningCurve> curves;
  for (const auto& r : records) {
    if (r.ok()) curves.push_back(r.curve);
  }
  if (curves.empty()) throw Error("aggregate: every run failed");
  return aggregate_curves(curves);
}

std::vector<double> final_success(const std::vector<RunRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.ok() && !r.curve.empty()) out.push_back(r.curve.points.back().success);
  }
  return out;
}

}  // namespace qpamdp::bench
