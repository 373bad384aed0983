#pragma once

// Learners: gradient-descent SARSA(lambda), episodic natural actor-critic,
// the Q-PAMDP(k) alternating driver and the two baselines.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpamdp/core.hpp"
#include "qpamdp/envs/toy.hpp"
#include "qpamdp/policy.hpp"

namespace qpamdp {

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

struct SarsaConfig {
  double alpha = 0.01;
  double lambda = 0.5;
  double gamma = 1.0;
  int episodes_per_call = 50;
  int initial_burn_in_episodes = 2000;
  int max_steps = 200;
  double divergence_cap = 1e6;  // abort when ||omega||_inf exceeds this

  void validate() const;
};

struct EnacConfig {
  int batch_episodes = 50;
  double step_size = 0.1;
  double ridge = 1e-6;
  double gamma = 1.0;
  int max_steps = 200;

  void validate() const;
};

struct QPamdpConfig {
  static constexpr int kInfinity = 0;

  int k = 1;  // P-UPDATE calls per iteration; kInfinity selects the plateau rule
  int iterations = 100;
  int eval_episodes = 100;
  SarsaConfig sarsa;
  EnacConfig enac;
  double plateau_tolerance = 1e-3;  // on returns divided by return_scale()
  int plateau_patience = 3;
  int inner_cap = 25;
  double theta_tolerance = 0.0;  // > 0 stops once ||delta theta|| falls below it

  bool infinite() const { return k == kInfinity; }
  void validate() const;
};

struct CurvePoint {
  int iteration = 0;
  std::int64_t episodes = 0;
  double mean_return = 0.0;
  double success = 0.0;
  double std_error = 0.0;
};

struct LearningCurve {
  std::vector<CurvePoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

struct EvaluationConfig {
  int episodes = 100;
  double gamma = 1.0;
  int max_steps = 200;
  std::uint64_t seed = 0;
  // 0: evaluate after every outer iteration. > 0: evaluate whenever the
  // cumulative training-episode count hits a multiple of this value
  // (and once before training starts).
  std::int64_t checkpoint_interval = 0;
  // Training stops once this many episodes are consumed (0: unlimited).
  std::int64_t max_episodes = 0;
};

// Counts training episodes, stops learners at the budget and records the
// learning curve with a dedicated evaluation stream.
class TrainingMonitor {
 public:
  using Callback = std::function<void(const CurvePoint&, const CompositePolicy&)>;

  TrainingMonitor(const Environment& env, EvaluationConfig cfg);

  void on_start(const CompositePolicy& policy);
  void on_training_episode(const CompositePolicy& policy);
  void on_iteration_end(int iteration, const CompositePolicy& policy);
  bool exhausted() const { return cfg_.max_episodes > 0 && consumed_ >= cfg_.max_episodes; }

  std::int64_t episodes_consumed() const { return consumed_; }
  const LearningCurve& curve() const { return curve_; }
  LearningCurve take_curve() { return std::move(curve_); }
  void set_callback(Callback cb) { callback_ = std::move(cb); }

 private:
  void record(int iteration, const CompositePolicy& policy);

  const Environment& env_;
  EvaluationConfig cfg_;
  Rng eval_rng_;
  std::int64_t consumed_ = 0;
  int iteration_ = 0;
  LearningCurve curve_;
  Callback callback_;
};

// State of one SARSA(lambda) update, reported to an optional observer.
struct SarsaStep {
  int t = 0;
  ActionId action = 0;
  double reward = 0.0;
  double td_error = 0.0;
  bool terminal = false;
  const RowMatrix* trace = nullptr;  // after e <- gamma*lambda*e + phi
  const RowMatrix* weights = nullptr;  // after the update
  const Vector* features = nullptr;  // phi(s_t)
};
using SarsaObserver = std::function<void(const SarsaStep&)>;

// One on-policy episode with accumulating traces. theta (policy.parameters)
// stays fixed; discrete actions follow softmax over the evolving Q. The
// starting weights are policy.q.
QWeights sarsa_lambda_episode(const Environment& env, const CompositePolicy& policy, const SarsaConfig& cfg,
                              Rng& rng, const SarsaObserver& observer = {});

// Repeated SARSA(lambda) episodes: the finite stand-in for W(theta).
QWeights q_learn(const Environment& env, const CompositePolicy& policy, int budget_episodes,
                 const SarsaConfig& cfg, Rng& rng, TrainingMonitor* monitor = nullptr);

struct NaturalGradient {
  Vector w;
  double baseline = 0.0;
};

// Least squares of returns on [score sums, 1]; rows of score_sums are episodes.
NaturalGradient enac_natural_gradient(const Matrix& score_sums, const Vector& returns, double ridge);

struct PUpdateResult {
  GaussianParameterPolicy parameters;
  NaturalGradient gradient;
  double batch_mean_return = 0.0;
};

// One eNAC step on theta with omega fixed; norm-clipped ascent.
PUpdateResult p_update_enac(const Environment& env, const CompositePolicy& policy, const EnacConfig& cfg,
                            Rng& rng, TrainingMonitor* monitor = nullptr);

struct LearnerResult {
  CompositePolicy policy;
  LearningCurve curve;
  std::int64_t episodes_consumed = 0;
};

LearnerResult q_pamdp(const Environment& env, const CompositePolicy& initial, const QPamdpConfig& cfg, Rng& rng,
                      TrainingMonitor* monitor = nullptr);

// eNAC over the joint (omega, theta) vector.
LearnerResult direct_policy_search(const Environment& env, const CompositePolicy& initial, const EnacConfig& cfg,
                                   int iterations, Rng& rng, TrainingMonitor* monitor = nullptr);

// SARSA(lambda) only, theta frozen at its initial value.
LearnerResult fixed_parameter_baseline(const Environment& env, const CompositePolicy& initial,
                                       const SarsaConfig& cfg, int iterations, Rng& rng,
                                       TrainingMonitor* monitor = nullptr);

struct GradientCheck {
  Vector analytic;     // grad_theta J(theta, omega*) with omega* = W(theta) held fixed
  Vector finite_diff;  // central differences of H, re-solving W at each probe
  double rel_error = 0.0;  // ||analytic - fd||_inf / max(1, ||analytic||_inf)
  bool differentiable = true;
  std::string diagnostic;
};

// Numerical check of grad H(theta) = grad_theta J(theta, W(theta)) on the toy.
GradientCheck gradient_of_H_check(const envs::ToyPamdp& toy, const std::vector<double>& theta,
                                  const std::vector<double>& variances, double step = 1e-5);

}  // namespace qpamdp
