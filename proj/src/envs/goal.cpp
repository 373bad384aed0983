#include "qpamdp/envs/goal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qpamdp::envs {

using namespace goal_index;

void GoalConfig::validate() const {
  const double positives[] = {field_width,  field_length,   goal_width,    player_speed,
                              keeper_speed, kick_speed,     friction,      catch_radius,
                              control_radius, keeper_start_distance, keeper_area_width, keeper_area_depth};
  for (double v : positives) {
    if (!(v > 0.0)) throw Error("goal config: geometric and speed constants must be positive");
  }
  if (!(goal_width < field_width)) throw Error("goal config: goal_width must be < field_width");
  if (friction > 1.0) throw Error("goal config: friction must be in (0, 1]");
  if (noise_fraction < 0.0) throw Error("goal config: noise_fraction must be >= 0");
  if (tick_cap < 1 || max_steps < 1) throw Error("goal config: tick_cap and max_steps must be >= 1");
}

double GoalConfig::diagonal() const { return std::hypot(field_width, field_length); }

StateVector GoalState::exported() const {
  StateVector s(kStateDim);
  s << player.x(), player.y(), player_vel.x(), player_vel.y(), player_facing, keeper.x(), keeper.y(),
      keeper_vel.x(), keeper_vel.y(), keeper_facing, ball.x(), ball.y(), ball_vel.x(), ball_vel.y();
  return s;
}

GoalState GoalState::from_exported(const StateVector& s) {
  if (s.size() != kStateDim) throw DimensionMismatch("goal state", kStateDim, s.size());
  GoalState g;
  g.player = {s[kPlayerX], s[kPlayerY]};
  g.player_vel = {s[kPlayerVx], s[kPlayerVy]};
  g.player_facing = s[kPlayerFacing];
  g.keeper = {s[kKeeperX], s[kKeeperY]};
  g.keeper_vel = {s[kKeeperVx], s[kKeeperVy]};
  g.keeper_facing = s[kKeeperFacing];
  g.ball = {s[kBallX], s[kBallY]};
  g.ball_vel = {s[kBallVx], s[kBallVy]};
  return g;
}

namespace {

Vec2 move_towards(const Vec2& from, const Vec2& to, double speed) {
  const Vec2 d = to - from;
  const double n = d.norm();
  if (n <= speed) return d;
  return d * (speed / n);
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Distance along unit direction `dir` from `p` to the boundary of the field box.
double exit_distance(const GoalConfig& cfg, const Vec2& p, const Vec2& dir) {
  double t = std::numeric_limits<double>::infinity();
  if (dir.x() > 0) t = std::min(t, (cfg.field_width - p.x()) / dir.x());
  if (dir.x() < 0) t = std::min(t, -p.x() / dir.x());
  if (dir.y() > 0) t = std::min(t, (cfg.field_length - p.y()) / dir.y());
  if (dir.y() < 0) t = std::min(t, -p.y() / dir.y());
  return std::max(0.0, t);
}

double facing_of(const Vec2& v, double previous) {
  return v.squaredNorm() > 0.0 ? std::atan2(v.y(), v.x()) : previous;
}

}  // namespace

Vec2 keeper_policy(const GoalConfig& cfg, const GoalState& s) {
  Vec2 target = s.ball;
  if (s.shot_in_flight && s.ball_vel.squaredNorm() > 0.0) {
    const Vec2 dir = s.ball_vel.normalized();
    const Vec2 end = s.ball + dir * exit_distance(cfg, s.ball, dir);
    const Vec2 ab = end - s.ball;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((s.keeper - s.ball).dot(ab) / len2, 0.0, 1.0) : 0.0;
    target = s.ball + t * ab;
  }
  const double half = 0.5 * cfg.keeper_area_width;
  const double mid = 0.5 * cfg.field_width;
  target.x() = std::clamp(target.x(), mid - half, mid + half);
  target.y() = std::clamp(target.y(), cfg.field_length - cfg.keeper_area_depth, cfg.field_length);
  return move_towards(s.keeper, target, cfg.keeper_speed);
}

GoalEnv::GoalEnv(GoalConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  schemas_ = {
      ActionSchema{kKickTo, "kick-to", {{0.0, cfg_.field_width}, {0.0, cfg_.field_length}}},
      ActionSchema{kShootLeft, "shoot-goal-left", {{0.0, 1.0}}},
      ActionSchema{kShootRight, "shoot-goal-right", {{0.0, 1.0}}},
  };
  check_schemas(schemas_);
}

double GoalEnv::goal_distance(const Vec2& p) const {
  return (p - Vec2(0.5 * cfg_.field_width, cfg_.field_length)).norm();
}

StateVector GoalEnv::reset(Rng& rng) const {
  GoalState g;
  g.player = {rng.uniform(0.0, cfg_.field_width), 0.0};
  g.player_facing = 0.5 * std::numbers::pi;
  g.ball = g.player;
  const Vec2 goal_centre(0.5 * cfg_.field_width, cfg_.field_length);
  const Vec2 to_ball = g.ball - goal_centre;
  const double dist = std::min(cfg_.keeper_start_distance, to_ball.norm());
  g.keeper = goal_centre + to_ball.normalized() * dist;
  g.keeper_facing = facing_of(-to_ball, 0.0);
  return g.exported();
}

StepResult GoalEnv::step(const StateVector& s, const ParameterizedAction& action, Rng& rng) const {
  return simulate(s, action, rng, nullptr, nullptr);
}

StepResult GoalEnv::simulate(const StateVector& s, const ParameterizedAction& action, Rng& rng,
                             GoalOutcome* outcome, std::vector<GoalTick>* ticks) const {
  const ParameterizedAction act = validate_action(schema(action.id), action);
  GoalState st = GoalState::from_exported(s);
  auto finish = [&](GoalOutcome o, double reward, bool terminal) {
    if (outcome) *outcome = o;
    return StepResult{st.exported(), reward, terminal};
  };

  Vec2 target;
  if (act.id == kKickTo) {
    target = {act.params[0], act.params[1]};
    const double sigma = cfg_.noise_fraction * (target - st.ball).norm();
    target += sigma * Vec2(rng.normal(), rng.normal());
    st.kick_target = target;
  } else {
    const double half = 0.5 * cfg_.goal_width;
    const double base = act.id == kShootLeft ? cfg_.left_post() : 0.5 * cfg_.field_width;
    target = {base + act.params[0] * half, cfg_.field_length};
    target.x() += cfg_.noise_fraction * (target - st.ball).norm() * rng.normal();
    st.shot_in_flight = true;
  }
  const Vec2 d = target - st.ball;
  st.ball_vel = d.squaredNorm() > 0.0 ? Vec2(d.normalized() * cfg_.kick_speed) : Vec2::Zero();

  for (int tick = 0; tick < cfg_.tick_cap; ++tick) {
    const Vec2 keeper_cmd = keeper_policy(cfg_, st);
    const Vec2 ball_before = st.ball;

    if (st.kick_target) {
      const double remaining = (*st.kick_target - st.ball).norm();
      if (st.ball_vel.norm() >= remaining) {
        st.ball = *st.kick_target;
        st.ball_vel.setZero();
        st.kick_target.reset();
      } else {
        st.ball += st.ball_vel;
        st.ball_vel *= cfg_.friction;
      }
    } else if (st.ball_vel.squaredNorm() > 0.0) {
      st.ball += st.ball_vel;
      st.ball_vel *= cfg_.friction;
      if (st.ball_vel.norm() < 1e-3) {
        st.ball_vel.setZero();
        st.shot_in_flight = false;
      }
    }

    st.player_vel = move_towards(st.player, st.ball, cfg_.player_speed);
    st.player += st.player_vel;
    st.player_facing = facing_of(st.player_vel, st.player_facing);
    st.keeper_vel = keeper_cmd;
    st.keeper += keeper_cmd;
    st.keeper_facing = facing_of(keeper_cmd, st.keeper_facing);

    if (ticks) ticks->push_back(GoalTick{st, false});

    if (segment_distance(st.keeper, ball_before, st.ball) <= cfg_.catch_radius) {
      st.ball_vel.setZero();
      return finish(GoalOutcome::kSaved, -goal_distance(st.ball), true);
    }
    if (st.ball.y() > cfg_.field_length) {
      const double t = (cfg_.field_length - ball_before.y()) / (st.ball.y() - ball_before.y());
      const Vec2 crossing = ball_before + t * (st.ball - ball_before);
      st.ball_vel.setZero();
      if (crossing.x() >= cfg_.left_post() && crossing.x() <= cfg_.right_post()) {
        return finish(GoalOutcome::kGoal, kGoalReward, true);
      }
      st.ball = crossing;
      return finish(GoalOutcome::kOut, -goal_distance(crossing), true);
    }
    if (st.ball.x() < 0.0 || st.ball.x() > cfg_.field_width || st.ball.y() < 0.0) {
      const Vec2 dir = (st.ball - ball_before).normalized();
      st.ball = ball_before + dir * exit_distance(cfg_, ball_before, dir);
      st.ball_vel.setZero();
      return finish(GoalOutcome::kOut, -goal_distance(st.ball), true);
    }
    const bool ball_loose = !st.kick_target && !st.shot_in_flight && st.ball_vel.squaredNorm() == 0.0;
    if (ball_loose && (st.player - st.ball).norm() <= cfg_.control_radius) {
      if (ticks) ticks->back().player_has_ball = true;
      return finish(GoalOutcome::kOngoing, 0.0, false);
    }
  }
  return finish(GoalOutcome::kTimeout, -goal_distance(st.ball), true);
}

double GoalEnv::success(const Episode& episode) const {
  if (episode.empty()) return 0.0;
  const Transition& last = episode.transitions.back();
  return last.terminal && last.reward == kGoalReward ? 1.0 : 0.0;
}

}  // namespace qpamdp::envs
