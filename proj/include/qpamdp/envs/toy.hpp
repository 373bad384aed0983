#pragma once

// One-state, one-step PAMDP with closed-form objective:
// r(a, x) = c_a - (x - mu_a)^2.

#include <vector>

#include "qpamdp/core.hpp"

namespace qpamdp::envs {

struct ToyConfig {
  std::vector<double> c{1.0, 2.0};
  std::vector<double> mu{0.5, -0.5};
  Interval bounds{-2.0, 2.0};

  void validate() const;
};

class ToyPamdp final : public Environment {
 public:
  explicit ToyPamdp(ToyConfig cfg = {});

  std::string name() const override { return "toy"; }
  int state_dim() const override { return 1; }
  const std::vector<ActionSchema>& schemas() const override { return schemas_; }
  StateVector reset(Rng& rng) const override;
  StepResult step(const StateVector& s, const ParameterizedAction& action, Rng& rng) const override;

  double reward(ActionId a, double x) const;
  const ToyConfig& config() const { return cfg_; }

 private:
  ToyConfig cfg_;
  std::vector<ActionSchema> schemas_;
};

struct ToyClosedForms {
  std::vector<double> expected_reward;  // E[r(a, x)] per action under the Gaussian head
  ActionId best_action = 0;             // W(theta), as the greedy discrete policy
  double H = 0.0;
};

// theta[a] is the mean of action a (psi = (1)); variances[a] its sigma^2.
// Ignores clamping; exact while the Gaussian mass stays inside the bounds.
ToyClosedForms toy_closed_forms(const ToyPamdp& toy, const std::vector<double>& theta,
                                const std::vector<double>& variances);

}  // namespace qpamdp::envs
