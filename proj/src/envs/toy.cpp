#include "qpamdp/envs/toy.hpp"

#include <algorithm>

namespace qpamdp::envs {

void ToyConfig::validate() const {
  if (c.size() != mu.size() || c.empty()) throw Error("toy: c and mu must be non-empty and equally long");
  if (!(bounds.lower < bounds.upper)) throw Error("toy: empty parameter interval");
  for (double m : mu) {
    if (m < bounds.lower || m > bounds.upper) throw Error("toy: every mu must lie inside the parameter bounds");
  }
}

ToyPamdp::ToyPamdp(ToyConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (std::size_t a = 0; a < cfg_.c.size(); ++a) {
    schemas_.push_back(ActionSchema{static_cast<ActionId>(a), "a" + std::to_string(a), {cfg_.bounds}});
  }
}

StateVector ToyPamdp::reset(Rng&) const { return StateVector::Zero(1); }

double ToyPamdp::reward(ActionId a, double x) const {
  const double d = x - cfg_.mu.at(a);
  return cfg_.c.at(a) - d * d;
}

StepResult ToyPamdp::step(const StateVector& s, const ParameterizedAction& action, Rng&) const {
  const ParameterizedAction x = validate_action(schema(action.id), action);
  return StepResult{s, reward(x.id, x.params[0]), true};
}

ToyClosedForms toy_closed_forms(const ToyPamdp& toy, const std::vector<double>& theta,
                                const std::vector<double>& variances) {
  const auto& cfg = toy.config();
  if (theta.size() != cfg.c.size()) {
    throw DimensionMismatch("toy theta", static_cast<long>(cfg.c.size()), static_cast<long>(theta.size()));
  }
  if (variances.size() != cfg.c.size()) {
    throw DimensionMismatch("toy variances", static_cast<long>(cfg.c.size()), static_cast<long>(variances.size()));
  }
  ToyClosedForms out;
  out.expected_reward.resize(theta.size());
  for (std::size_t a = 0; a < theta.size(); ++a) {
    const double d = theta[a] - cfg.mu[a];
    out.expected_reward[a] = cfg.c[a] - d * d - variances[a];
  }
  const auto best = std::max_element(out.expected_reward.begin(), out.expected_reward.end());
  out.best_action = static_cast<ActionId>(best - out.expected_reward.begin());
  out.H = *best;
  return out;
}

}  // namespace qpamdp::envs
