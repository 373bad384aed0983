#pragma once

// Simplified robot-soccer goal domain: a striker against a keeper.
//
// Coordinates: x across the field in [0, width], y towards the goal in
// [0, length]. The goal mouth is centred on the line y = length. Each
// decision is one macro step: the ball is kicked and the world is ticked
// until the player controls the ball again or the episode ends.

#include <array>
#include <optional>
#include <set>

#include "qpamdp/core.hpp"

namespace qpamdp::envs {

struct GoalConfig {
  double field_width = 30.0;
  double field_length = 40.0;
  double goal_width = 7.0;
  double player_speed = 1.0;
  double keeper_speed = 0.8;
  double kick_speed = 3.0;
  double friction = 0.99;        // ball speed decay per tick
  double noise_fraction = 0.02;  // target noise stddev as a fraction of kick distance
  double keeper_start_distance = 4.0;  // from goal centre, towards the ball
  double keeper_area_width = 15.0;     // keeper stays inside this box in front of the goal
  double keeper_area_depth = 12.0;
  double catch_radius = 1.0;
  double control_radius = 1.0;
  int tick_cap = 300;  // ticks per macro step
  int max_steps = 200;

  void validate() const;
  double left_post() const { return 0.5 * (field_width - goal_width); }
  double right_post() const { return 0.5 * (field_width + goal_width); }
  double diagonal() const;
};

// Exported state layout (14 variables).
namespace goal_index {
inline constexpr int kPlayerX = 0, kPlayerY = 1, kPlayerVx = 2, kPlayerVy = 3, kPlayerFacing = 4;
inline constexpr int kKeeperX = 5, kKeeperY = 6, kKeeperVx = 7, kKeeperVy = 8, kKeeperFacing = 9;
inline constexpr int kBallX = 10, kBallY = 11, kBallVx = 12, kBallVy = 13;
inline constexpr int kStateDim = 14;
}  // namespace goal_index

// Velocities and orientations; excluded from the Fourier basis.
inline const std::set<int> kGoalVelocityDims{2, 3, 4, 7, 8, 9, 12, 13};

enum GoalAction : ActionId { kKickTo = 0, kShootLeft = 1, kShootRight = 2 };

using Vec2 = Eigen::Vector2d;

// Full simulator state between ticks.
struct GoalState {
  Vec2 player = Vec2::Zero();
  Vec2 player_vel = Vec2::Zero();
  double player_facing = 0.0;
  Vec2 keeper = Vec2::Zero();
  Vec2 keeper_vel = Vec2::Zero();
  double keeper_facing = 0.0;
  Vec2 ball = Vec2::Zero();
  Vec2 ball_vel = Vec2::Zero();
  bool shot_in_flight = false;
  std::optional<Vec2> kick_target;  // set while a kick-to is travelling

  StateVector exported() const;
  static GoalState from_exported(const StateVector& s);
};

// Keeper velocity command: chase the ball, or during a shot head for the
// closest point of the remaining ball path. Targets are clamped into the
// keeper's area.
Vec2 keeper_policy(const GoalConfig& cfg, const GoalState& s);

enum class GoalOutcome { kOngoing, kGoal, kSaved, kOut, kTimeout };

struct GoalTick {
  GoalState state;
  bool player_has_ball = false;
};

class GoalEnv final : public Environment {
 public:
  explicit GoalEnv(GoalConfig cfg = {});

  std::string name() const override { return "goal"; }
  int state_dim() const override { return goal_index::kStateDim; }
  const std::vector<ActionSchema>& schemas() const override { return schemas_; }
  StateVector reset(Rng& rng) const override;
  StepResult step(const StateVector& s, const ParameterizedAction& action, Rng& rng) const override;
  // 1 if the episode ended with a goal, else 0.
  double success(const Episode& episode) const override;
  double return_scale() const override { return kGoalReward; }

  // Same as step but also reports how the macro step ended and (optionally)
  // every intermediate tick.
  StepResult simulate(const StateVector& s, const ParameterizedAction& action, Rng& rng, GoalOutcome* outcome,
                      std::vector<GoalTick>* ticks = nullptr) const;

  const GoalConfig& config() const { return cfg_; }
  double goal_distance(const Vec2& p) const;

  static constexpr double kGoalReward = 50.0;

 private:
  GoalConfig cfg_;
  std::vector<ActionSchema> schemas_;
};

}  // namespace qpamdp::envs
