#include "qpamdp/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpamdp {

void SarsaConfig::validate() const {
  if (!(alpha > 0.0)) throw Error("sarsa.alpha must be > 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("sarsa.lambda must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("sarsa.gamma must be in [0, 1]");
  if (episodes_per_call < 1) throw Error("sarsa.episodes_per_call must be >= 1");
  if (initial_burn_in_episodes < 1) throw Error("sarsa.burn_in must be >= 1");
  if (max_steps < 1) throw Error("sarsa.max_steps must be >= 1");
  if (!(divergence_cap > 0.0)) throw Error("sarsa.divergence_cap must be > 0");
}

void EnacConfig::validate() const {
  if (batch_episodes < 2) throw Error("enac.batch_episodes must be >= 2");
  if (!(step_size >= 0.0)) throw Error("enac.step_size must be >= 0");
  if (!(ridge >= 0.0)) throw Error("enac.ridge must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("enac.gamma must be in [0, 1]");
  if (max_steps < 1) throw Error("enac.max_steps must be >= 1");
}

void QPamdpConfig::validate() const {
  if (k < 0) throw Error("qpamdp.k must be >= 1 (or infinite)");
  if (iterations < 0) throw Error("qpamdp.iterations must be >= 0");
  if (eval_episodes < 1) throw Error("qpamdp.eval_episodes must be >= 1");
  if (plateau_patience < 1) throw Error("qpamdp.plateau_patience must be >= 1");
  if (inner_cap < 1) throw Error("qpamdp.inner_cap must be >= 1");
  sarsa.validate();
  enac.validate();
}

// ---------------------------------------------------------------------------

TrainingMonitor::TrainingMonitor(const Environment& env, EvaluationConfig cfg)
    : env_(env), cfg_(cfg), eval_rng_(cfg.seed) {
  if (cfg_.episodes < 1) throw Error("evaluation episodes must be >= 1");
  if (cfg_.checkpoint_interval < 0 || cfg_.max_episodes < 0) throw Error("negative evaluation budget");
}

void TrainingMonitor::on_start(const CompositePolicy& policy) {
  if (cfg_.checkpoint_interval > 0 && consumed_ == 0 && curve_.empty()) record(0, policy);
}

void TrainingMonitor::on_training_episode(const CompositePolicy& policy) {
  ++consumed_;
  if (cfg_.checkpoint_interval > 0 && consumed_ % cfg_.checkpoint_interval == 0) record(iteration_, policy);
}

void TrainingMonitor::on_iteration_end(int iteration, const CompositePolicy& policy) {
  iteration_ = iteration;
  if (cfg_.checkpoint_interval == 0) record(iteration, policy);
}

void TrainingMonitor::record(int iteration, const CompositePolicy& policy) {
  const ReturnEstimate est = estimate_J(env_, policy, cfg_.episodes, cfg_.gamma, cfg_.max_steps, eval_rng_);
  CurvePoint point{iteration, consumed_, est.mean, est.success, est.std_error};
  curve_.points.push_back(point);
  if (callback_) callback_(point, policy);
}

namespace {

TrainingMonitor default_monitor(const Environment& env, int episodes, double gamma, int max_steps, const Rng& rng) {
  EvaluationConfig cfg;
  cfg.episodes = episodes;
  cfg.gamma = gamma;
  cfg.max_steps = max_steps;
  cfg.seed = mix_seed(rng.seed(), 0x6576616cULL);
  return TrainingMonitor(env, cfg);
}

}  // namespace

// ---------------------------------------------------------------------------

QWeights sarsa_lambda_episode(const Environment& env, const CompositePolicy& policy, const SarsaConfig& cfg,
                              Rng& rng, const SarsaObserver& observer) {
  cfg.validate();
  CompositePolicy pi = policy;
  RowMatrix& w = pi.q.weights;
  RowMatrix trace = RowMatrix::Zero(w.rows(), w.cols());
  const Vector& lr = pi.phi->basis.learning_rate_scales();
  const auto& schemas = env.schemas();

  StateVector s = env.reset(rng);
  Vector phi = (*pi.phi)(s);
  SampledAction current = sample_action(pi, schemas, s, phi, rng);

  for (int t = 0; t < cfg.max_steps; ++t) {
    const ActionId a = current.action.id;
    StepResult result = env.step(s, current.action, rng);
    if (!result.next_state.allFinite() || !std::isfinite(result.reward)) {
      throw Error(env.name() + ": non-finite state or reward at step " + std::to_string(t));
    }
    const double q_sa = w.row(a).dot(phi);

    trace *= cfg.gamma * cfg.lambda;
    trace.row(a) += phi.transpose();

    double delta = result.reward - q_sa;
    Vector next_phi;
    SampledAction next;
    if (!result.terminal) {
      next_phi = (*pi.phi)(result.next_state);
      next = sample_action(pi, schemas, result.next_state, next_phi, rng);
      delta += cfg.gamma * w.row(next.action.id).dot(next_phi);
    }

    const double step = cfg.alpha * delta;
    for (Eigen::Index b = 0; b < w.rows(); ++b) {
      w.row(b) += step * trace.row(b).cwiseProduct(lr.transpose());
    }
    if (!w.allFinite() || w.cwiseAbs().maxCoeff() > cfg.divergence_cap) {
      throw DivergenceError("sarsa: ||omega||_inf exceeded " + std::to_string(cfg.divergence_cap) +
                            " at step " + std::to_string(t) + "; lower sarsa.alpha");
    }
    if (observer) observer(SarsaStep{t, a, result.reward, delta, result.terminal, &trace, &w, &phi});
    if (result.terminal) break;

    s = std::move(result.next_state);
    phi = std::move(next_phi);
    current = std::move(next);
  }
  return pi.q;
}

QWeights q_learn(const Environment& env, const CompositePolicy& policy, int budget_episodes, const SarsaConfig& cfg,
                 Rng& rng, TrainingMonitor* monitor) {
  if (budget_episodes < 1) throw Error("q_learn: budget_episodes must be >= 1");
  CompositePolicy pi = policy;
  for (int i = 0; i < budget_episodes; ++i) {
    if (monitor && monitor->exhausted()) break;
    pi.q = sarsa_lambda_episode(env, pi, cfg, rng);
    if (monitor) monitor->on_training_episode(pi);
  }
  return pi.q;
}

// ---------------------------------------------------------------------------

NaturalGradient enac_natural_gradient(const Matrix& score_sums, const Vector& returns, double ridge) {
  const Eigen::Index episodes = score_sums.rows();
  const Eigen::Index dim = score_sums.cols();
  if (episodes < 2) throw Error("enac: at least 2 episodes are required");
  if (returns.size() != episodes) throw DimensionMismatch("enac returns", episodes, returns.size());
  if (ridge < 0.0) throw Error("enac: ridge must be >= 0");

  // Ridge as extra rows keeps the solve on X rather than on X^T X.
  const Eigen::Index extra = ridge > 0.0 ? dim : 0;
  Matrix design = Matrix::Zero(episodes + extra, dim + 1);
  design.topLeftCorner(episodes, dim) = score_sums;
  design.col(dim).head(episodes).setOnes();
  if (extra > 0) design.bottomLeftCorner(dim, dim).diagonal().setConstant(std::sqrt(ridge));
  Vector target = Vector::Zero(episodes + extra);
  target.head(episodes) = returns;

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < dim + 1) {
    throw SingularSystemError("enac: singular least-squares system (rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(dim + 1) + "); increase enac.batch_episodes or enac.ridge");
  }
  Vector solution = qr.solve(target);
  // one refinement pass, residual in extended precision
  Vector residual(target.size());
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    long double r = target[i];
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
      r -= static_cast<long double>(design(i, j)) * static_cast<long double>(solution[j]);
    }
    residual[i] = static_cast<double>(r);
  }
  solution += qr.solve(residual);
  if (!solution.allFinite()) throw SingularSystemError("enac: non-finite solution; increase enac.batch_episodes");
  return NaturalGradient{solution.head(dim), solution[dim]};
}

namespace {

Vector clipped_step(const Vector& w, double step_size) {
  const double norm = w.norm();
  return step_size * w / std::max(1.0, norm);
}

}  // namespace

PUpdateResult p_update_enac(const Environment& env, const CompositePolicy& policy, const EnacConfig& cfg, Rng& rng,
                            TrainingMonitor* monitor) {
  cfg.validate();
  const GaussianParameterPolicy& params = policy.parameters;
  Matrix scores = Matrix::Zero(cfg.batch_episodes, params.flat_size());
  Vector returns(cfg.batch_episodes);

  for (int e = 0; e < cfg.batch_episodes; ++e) {
    Episode ep = rollout(env, policy, cfg.max_steps, rng);
    Vector g = Vector::Zero(params.flat_size());
    for (const auto& t : ep.transitions) {
      accumulate_grad_log_parameter_policy(params, t.state, t.action.id, t.sampled_params, g);
    }
    scores.row(e) = g.transpose();
    returns[e] = discounted_return(ep, cfg.gamma);
    if (monitor) monitor->on_training_episode(policy);
  }

  PUpdateResult out;
  out.gradient = enac_natural_gradient(scores, returns, cfg.ridge);
  out.batch_mean_return = returns.mean();
  out.parameters = params;
  out.parameters.set_flat_theta(params.flat_theta() + clipped_step(out.gradient.w, cfg.step_size));
  return out;
}

// ---------------------------------------------------------------------------

LearnerResult q_pamdp(const Environment& env, const CompositePolicy& initial, const QPamdpConfig& cfg, Rng& rng,
                      TrainingMonitor* monitor) {
  cfg.validate();
  std::optional<TrainingMonitor> local;
  if (!monitor) {
    local.emplace(default_monitor(env, cfg.eval_episodes, cfg.enac.gamma, cfg.enac.max_steps, rng));
    monitor = &*local;
  }

  CompositePolicy pi = initial;
  monitor->on_start(pi);
  pi.q = q_learn(env, pi, cfg.sarsa.initial_burn_in_episodes, cfg.sarsa, rng, monitor);

  const double scale = env.return_scale();
  for (int it = 1; it <= cfg.iterations; ++it) {
    if (monitor->exhausted()) break;
    const Vector theta_before = pi.parameters.flat_theta();

    if (!cfg.infinite()) {
      for (int j = 0; j < cfg.k && !monitor->exhausted(); ++j) {
        pi.parameters = p_update_enac(env, pi, cfg.enac, rng, monitor).parameters;
      }
    } else {
      double best = -std::numeric_limits<double>::infinity();
      int stale = 0;
      for (int j = 0; j < cfg.inner_cap && !monitor->exhausted(); ++j) {
        PUpdateResult r = p_update_enac(env, pi, cfg.enac, rng, monitor);
        pi.parameters = std::move(r.parameters);
        const double value = r.batch_mean_return / scale;
        stale = value - best < cfg.plateau_tolerance ? stale + 1 : 0;
        best = std::max(best, value);
        if (stale >= cfg.plateau_patience) break;
      }
    }

    if (!monitor->exhausted()) {
      pi.q = q_learn(env, pi, cfg.sarsa.episodes_per_call, cfg.sarsa, rng, monitor);
    }
    monitor->on_iteration_end(it, pi);

    if (cfg.theta_tolerance > 0.0 && (pi.parameters.flat_theta() - theta_before).norm() < cfg.theta_tolerance) {
      break;
    }
  }

  LearnerResult result{pi, {}, monitor->episodes_consumed()};
  result.curve = monitor->curve();
  return result;
}

LearnerResult direct_policy_search(const Environment& env, const CompositePolicy& initial, const EnacConfig& cfg,
                                   int iterations, Rng& rng, TrainingMonitor* monitor) {
  cfg.validate();
  if (iterations < 0) throw Error("direct_policy_search: iterations must be >= 0");
  if (!(initial.discrete.temperature > 0.0)) throw Error("direct_policy_search: temperature must be > 0");
  std::optional<TrainingMonitor> local;
  if (!monitor) {
    local.emplace(default_monitor(env, 100, cfg.gamma, cfg.max_steps, rng));
    monitor = &*local;
  }

  CompositePolicy pi = initial;
  monitor->on_start(pi);
  const int omega_size = static_cast<int>(pi.q.weights.size());
  const int theta_size = pi.parameters.flat_size();
  const double tau = pi.discrete.temperature;

  for (int it = 1; it <= iterations; ++it) {
    if (monitor->exhausted()) break;
    Matrix scores = Matrix::Zero(cfg.batch_episodes, omega_size + theta_size);
    Vector returns(cfg.batch_episodes);
    Vector g(omega_size + theta_size);
    for (int e = 0; e < cfg.batch_episodes; ++e) {
      Episode ep = rollout(env, pi, cfg.max_steps, rng);
      g.setZero();
      for (const auto& t : ep.transitions) {
        accumulate_grad_log_discrete_policy(pi.q, (*pi.phi)(t.state), t.action.id, tau, g.head(omega_size));
        accumulate_grad_log_parameter_policy(pi.parameters, t.state, t.action.id, t.sampled_params,
                                             g.tail(theta_size));
      }
      scores.row(e) = g.transpose();
      returns[e] = discounted_return(ep, cfg.gamma);
      monitor->on_training_episode(pi);
    }
    const NaturalGradient ng = enac_natural_gradient(scores, returns, cfg.ridge);
    const Vector step = clipped_step(ng.w, cfg.step_size);
    pi.q.flat() += step.head(omega_size);
    pi.parameters.set_flat_theta(pi.parameters.flat_theta() + step.tail(theta_size));
    monitor->on_iteration_end(it, pi);
  }

  LearnerResult result{pi, {}, monitor->episodes_consumed()};
  result.curve = monitor->curve();
  return result;
}

LearnerResult fixed_parameter_baseline(const Environment& env, const CompositePolicy& initial, const SarsaConfig& cfg,
                                       int iterations, Rng& rng, TrainingMonitor* monitor) {
  cfg.validate();
  if (iterations < 0) throw Error("fixed_parameter_baseline: iterations must be >= 0");
  std::optional<TrainingMonitor> local;
  if (!monitor) {
    local.emplace(default_monitor(env, 100, cfg.gamma, cfg.max_steps, rng));
    monitor = &*local;
  }

  CompositePolicy pi = initial;
  monitor->on_start(pi);
  for (int it = 1; it <= iterations; ++it) {
    if (monitor->exhausted()) break;
    pi.q = q_learn(env, pi, cfg.episodes_per_call, cfg, rng, monitor);
    monitor->on_iteration_end(it, pi);
  }

  LearnerResult result{pi, {}, monitor->episodes_consumed()};
  result.curve = monitor->curve();
  return result;
}

// ---------------------------------------------------------------------------

GradientCheck gradient_of_H_check(const envs::ToyPamdp& toy, const std::vector<double>& theta,
                                  const std::vector<double>& variances, double step) {
  const auto n = theta.size();
  const envs::ToyClosedForms at = envs::toy_closed_forms(toy, theta, variances);
  const auto& mu = toy.config().mu;

  GradientCheck check;
  check.analytic = Vector::Zero(static_cast<Eigen::Index>(n));
  check.finite_diff = Vector::Zero(static_cast<Eigen::Index>(n));

  // omega* held fixed: the greedy discrete policy puts all mass on W(theta),
  // so J(theta, omega*) = E[r(a*, x)] and only theta_{a*} has a gradient.
  check.analytic[at.best_action] = -2.0 * (theta[at.best_action] - mu[at.best_action]);

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> plus = theta;
    std::vector<double> minus = theta;
    plus[i] += step;
    minus[i] -= step;
    const envs::ToyClosedForms hp = envs::toy_closed_forms(toy, plus, variances);
    const envs::ToyClosedForms hm = envs::toy_closed_forms(toy, minus, variances);
    if (hp.best_action != at.best_action || hm.best_action != at.best_action) {
      check.differentiable = false;
      check.diagnostic = "W not differentiable here: greedy action switches within the probe step of theta[" +
                         std::to_string(i) + "]";
      check.rel_error = std::numeric_limits<double>::quiet_NaN();
      return check;
    }
    check.finite_diff[static_cast<Eigen::Index>(i)] = (hp.H - hm.H) / (2.0 * step);
  }
  const double denom = std::max(1.0, check.analytic.cwiseAbs().maxCoeff());
  check.rel_error = (check.analytic - check.finite_diff).cwiseAbs().maxCoeff() / denom;
  return check;
}

}  // namespace qpamdp
