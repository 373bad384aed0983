#include "qpamdp/envs/platform.hpp"

#include <algorithm>
#include <cmath>

namespace qpamdp::envs {

using namespace platform_index;

void PlatformConfig::validate() const {
  for (double l : platform_lengths) {
    if (!(l > 0.0)) throw Error("platform config: platform lengths must be positive");
  }
  for (double g : gap_widths) {
    if (!(g > 0.0)) throw Error("platform config: gap widths must be positive");
  }
  const double positives[] = {enemy_speed, enemy_width, enemy_height, agent_width, run_period, run_accel,
                              hop_apex,    hop_time,    leap_apex,    leap_time,   dt};
  for (double v : positives) {
    if (!(v > 0.0)) throw Error("platform config: physical constants must be positive");
  }
  if (!(patrol_fraction > 0.0 && patrol_fraction <= 1.0)) throw Error("platform config: patrol_fraction in (0, 1]");
  for (const Interval& b : {run_dx, hop_dx, leap_dx}) {
    if (!(b.lower >= 0.0 && b.lower <= b.upper)) throw Error("platform config: dx bounds must be 0 <= lower <= upper");
  }
  if (max_steps < 1) throw Error("platform config: max_steps must be >= 1");
}

double PlatformConfig::total_length() const {
  return platform_lengths[0] + platform_lengths[1] + platform_lengths[2] + gap_widths[0] + gap_widths[1];
}

double PlatformConfig::platform_start(int i) const {
  double x = 0.0;
  for (int j = 0; j < i; ++j) x += platform_lengths[j] + gap_widths[j];
  return x;
}

Interval PlatformConfig::patrol(int i) const {
  const double margin = 0.5 * (1.0 - patrol_fraction) * platform_lengths[i];
  return {platform_start(i) + margin, platform_end(i) - margin};
}

PlatformEnv::PlatformEnv(PlatformConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  schemas_ = {
      ActionSchema{kRun, "run", {cfg_.run_dx}},
      ActionSchema{kHop, "hop", {cfg_.hop_dx}},
      ActionSchema{kLeap, "leap", {cfg_.leap_dx}},
  };
  check_schemas(schemas_);
}

int PlatformEnv::platform_at(double x) const {
  for (int i = 0; i < 3; ++i) {
    if (x >= cfg_.platform_start(i) && x <= cfg_.platform_end(i)) return i;
  }
  return x > cfg_.total_length() ? 2 : -1;
}

StateVector PlatformEnv::reset(Rng&) const {
  StateVector s(kStateDim);
  s << 0.0, 0.0, cfg_.patrol(0).lower, cfg_.enemy_speed;
  return s;
}

StepResult PlatformEnv::step(const StateVector& s, const ParameterizedAction& action, Rng&) const {
  return simulate(s, action, nullptr, nullptr);
}

StepResult PlatformEnv::simulate(const StateVector& s, const ParameterizedAction& action, PlatformOutcome* outcome,
                                 std::vector<PlatformFrame>* frames) const {
  if (s.size() != kStateDim) throw DimensionMismatch("platform state", kStateDim, s.size());
  const ParameterizedAction act = validate_action(schema(action.id), action);
  const double dx = act.params[0];
  const double x0 = s[kX];
  const int start_platform = platform_at(x0);
  if (start_platform < 0 || start_platform > 1) {
    throw Error("platform: actions are only allowed while standing on platform 1 or 2 (x = " + std::to_string(x0) +
                ")");
  }

  // Enemies ahead of the agent have never moved; the one behind is frozen.
  std::array<double, 2> ex{cfg_.patrol(0).lower, cfg_.patrol(1).lower};
  std::array<double, 2> ev{cfg_.enemy_speed, cfg_.enemy_speed};
  ex[start_platform] = s[kEnemyX];
  ev[start_platform] = s[kEnemyXdot];

  double x = x0;
  double v = s[kXdot];
  double y = 0.0;
  const bool jumping = act.id != kRun;
  const double duration = act.id == kRun ? cfg_.run_period : act.id == kHop ? cfg_.hop_time : cfg_.leap_time;
  const double apex = act.id == kHop ? cfg_.hop_apex : cfg_.leap_apex;
  const double jump_vx = dx / duration;
  const int frames_total = std::max(1, static_cast<int>(std::lround(duration / cfg_.dt)));
  const double dt = duration / frames_total;
  const double total = cfg_.total_length();
  PlatformOutcome result = PlatformOutcome::kOngoing;

  for (int f = 1; f <= frames_total; ++f) {
    if (jumping) {
      const double tau = static_cast<double>(f) / frames_total;
      x += jump_vx * dt;
      y = f == frames_total ? 0.0 : 4.0 * apex * tau * (1.0 - tau);
      v = jump_vx;
    } else {
      const double target = dx / cfg_.run_period;
      v += std::clamp(target - v, -cfg_.run_accel * dt, cfg_.run_accel * dt);
      x += v * dt;
    }
    x = std::min(x, total);

    for (int i = 0; i < 2; ++i) {
      if (x < cfg_.platform_start(i) || x > cfg_.platform_end(i)) continue;
      const Interval patrol = cfg_.patrol(i);
      ex[i] += ev[i] * dt;
      if (ex[i] > patrol.upper) {
        ex[i] = 2.0 * patrol.upper - ex[i];
        ev[i] = -ev[i];
      } else if (ex[i] < patrol.lower) {
        ex[i] = 2.0 * patrol.lower - ex[i];
        ev[i] = -ev[i];
      }
    }
    if (frames) frames->push_back(PlatformFrame{f * dt, x, y, ex, ev});

    const int here = platform_at(x);
    if (here >= 0 && here < 2 && y < cfg_.enemy_height &&
        std::abs(x - ex[here]) < 0.5 * (cfg_.agent_width + cfg_.enemy_width)) {
      result = PlatformOutcome::kEnemy;
      break;
    }
    if (!jumping || f == frames_total) {
      if (here < 0) {
        result = PlatformOutcome::kFell;
        break;
      }
      if (here == 2) {
        result = PlatformOutcome::kGoal;
        break;
      }
    }
  }
  if (jumping) v = 0.0;  // landing stops the agent

  const int here = platform_at(x);
  const int shown = here >= 0 && here < 2 ? here : (here == 2 ? 1 : std::max(start_platform, 0));
  StateVector next(kStateDim);
  next << x, v, ex[shown], ev[shown];
  if (outcome) *outcome = result;
  return StepResult{next, (x - x0) / total, result != PlatformOutcome::kOngoing};
}

double PlatformEnv::success(const Episode& episode) const {
  double best = 0.0;
  for (const auto& t : episode.transitions) best = std::max(best, t.next_state[kX]);
  return best / cfg_.total_length();
}

}  // namespace qpamdp::envs
