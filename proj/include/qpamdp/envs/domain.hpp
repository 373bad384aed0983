#pragma once

// Per-environment learning setup: state scaling, Fourier basis shape,
// parameter-policy features and the initial parameter policy.

#include <memory>
#include <string>
#include <vector>

#include "qpamdp/approx.hpp"
#include "qpamdp/envs/goal.hpp"
#include "qpamdp/envs/platform.hpp"
#include "qpamdp/envs/toy.hpp"
#include "qpamdp/policy.hpp"

namespace qpamdp::envs {

struct Domain {
  std::shared_ptr<const Environment> env;
  StateScaler scaler;
  BasisSpec basis;
  FeatureMap features;
  std::vector<Matrix> theta0;
  std::vector<Vector> variances;
  double temperature = 1.0;

  std::shared_ptr<const FourierFeatures> fourier() const;
  // omega0 = 0 (uniform discrete policy), theta = theta0.
  CompositePolicy initial_policy() const;
};

Domain make_toy_domain(const ToyConfig& cfg = {}, double variance = 0.01);
Domain make_goal_domain(const GoalConfig& cfg = {});
Domain make_platform_domain(const PlatformConfig& cfg = {});

// psi for the goal domain: shoot actions (1, g) with g the keeper's x over
// the field width; kick-to (1, bx, by, bx^2, by^2, ux, uy) with positions
// over the field extents and u the unit vector from keeper to ball.
FeatureMap goal_feature_map(const GoalConfig& cfg);
// psi for Platform: (1, x, xdot, ex, exdot), each divided by its range.
FeatureMap platform_feature_map(const PlatformConfig& cfg);

}  // namespace qpamdp::envs
