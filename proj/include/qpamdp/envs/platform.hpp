#pragma once

// Side-scrolling Platform domain: three platforms separated by two gaps,
// with a patrolling enemy on each of the first two platforms. The agent
// acts only on the ground; one decision carries it through a full run
// period or a full jump.

#include <array>
#include <vector>

#include "qpamdp/core.hpp"

namespace qpamdp::envs {

struct PlatformConfig {
  std::array<double, 3> platform_lengths{15.0, 20.0, 15.0};
  std::array<double, 2> gap_widths{5.0, 7.0};
  double patrol_fraction = 0.6;  // enemies patrol the middle fraction of their platform
  double enemy_speed = 0.5;
  double enemy_width = 0.5;
  double enemy_height = 1.5;
  double agent_width = 0.5;
  double run_period = 1.0;
  double run_accel = 6.0;
  double hop_apex = 3.0;
  double hop_time = 1.0;
  double leap_apex = 1.0;
  double leap_time = 0.8;
  double dt = 0.02;
  Interval run_dx{0.0, 4.0};
  Interval hop_dx{0.0, 4.0};
  Interval leap_dx{0.0, 10.0};
  int max_steps = 200;

  void validate() const;
  double total_length() const;
  double platform_start(int i) const;
  double platform_end(int i) const { return platform_start(i) + platform_lengths[i]; }
  Interval patrol(int i) const;  // i in {0, 1}
  double max_speed() const { return run_dx.upper / run_period; }
};

// Exported state: (x, xdot, enemy x, enemy xdot) for the enemy of the
// platform the agent stands on.
namespace platform_index {
inline constexpr int kX = 0, kXdot = 1, kEnemyX = 2, kEnemyXdot = 3, kStateDim = 4;
}

enum PlatformAction : ActionId { kRun = 0, kHop = 1, kLeap = 2 };

// One simulation frame, for trajectory inspection.
struct PlatformFrame {
  double time = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::array<double, 2> enemy_x{};
  std::array<double, 2> enemy_xdot{};
};

enum class PlatformOutcome { kOngoing, kEnemy, kFell, kGoal };

class PlatformEnv final : public Environment {
 public:
  explicit PlatformEnv(PlatformConfig cfg = {});

  std::string name() const override { return "platform"; }
  int state_dim() const override { return platform_index::kStateDim; }
  const std::vector<ActionSchema>& schemas() const override { return schemas_; }
  StateVector reset(Rng& rng) const override;
  StepResult step(const StateVector& s, const ParameterizedAction& action, Rng& rng) const override;
  // Furthest x reached as a fraction of the course length.
  double success(const Episode& episode) const override;

  StepResult simulate(const StateVector& s, const ParameterizedAction& action, PlatformOutcome* outcome,
                      std::vector<PlatformFrame>* frames = nullptr) const;

  const PlatformConfig& config() const { return cfg_; }
  // Index of the platform containing x, or -1 over a gap.
  int platform_at(double x) const;

 private:
  PlatformConfig cfg_;
  std::vector<ActionSchema> schemas_;
};

}  // namespace qpamdp::envs
