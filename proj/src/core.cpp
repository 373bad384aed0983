#include "qpamdp/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "qpamdp/policy.hpp"

namespace qpamdp {

namespace {

std::string mismatch_message(const std::string& what, long expected, long actual) {
  std::ostringstream os;
  os << what << ": expected length " << expected << ", got " << actual;
  return os.str();
}

}  // namespace

DimensionMismatch::DimensionMismatch(const std::string& what, long expected, long actual)
    : Error(mismatch_message(what, expected, actual)), expected_(expected), actual_(actual) {}

void check_schemas(std::span<const ActionSchema> schemas) {
  std::set<ActionId> seen;
  for (const auto& schema : schemas) {
    if (!seen.insert(schema.id).second) {
      throw Error("duplicate action id " + std::to_string(schema.id));
    }
    for (const auto& b : schema.bounds) {
      if (!(b.lower <= b.upper)) {
        throw Error("action '" + schema.name + "' has an inverted parameter interval");
      }
    }
  }
}

std::vector<double> Episode::rewards() const {
  std::vector<double> out;
  out.reserve(transitions.size());
  for (const auto& t : transitions) out.push_back(t.reward);
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double Rng::uniform() { return unit_(engine_); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() { return gauss_(engine_); }

int Rng::categorical(std::span<const double> probabilities) {
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u landed on the rounding tail: return the last index with positive mass
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

Rng Rng::derive(std::uint64_t salt) const { return Rng(mix_seed(seed_, salt)); }

double Environment::success(const Episode& episode) const {
  return discounted_return(episode, 1.0);
}

const ActionSchema& Environment::schema(ActionId id) const {
  for (const auto& s : schemas()) {
    if (s.id == id) return s;
  }
  throw Error(name() + ": unknown action id " + std::to_string(id));
}

ParameterizedAction validate_action(const ActionSchema& schema, const ParameterizedAction& action) {
  if (action.id != schema.id) {
    throw Error("action id " + std::to_string(action.id) + " does not match schema '" + schema.name + "'");
  }
  if (action.params.size() != schema.param_dim()) {
    throw DimensionMismatch("parameters of action '" + schema.name + "'", schema.param_dim(),
                            action.params.size());
  }
  ParameterizedAction out = action;
  for (int i = 0; i < schema.param_dim(); ++i) {
    out.params[i] = std::clamp(out.params[i], schema.bounds[i].lower, schema.bounds[i].upper);
  }
  return out;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

double discounted_return(const Episode& episode, double gamma) {
  double total = 0.0;
  double discount = 1.0;
  for (const auto& t : episode.transitions) {
    total += discount * t.reward;
    discount *= gamma;
  }
  return total;
}

Episode rollout(const Environment& env, const CompositePolicy& policy, int max_steps, Rng& rng) {
  if (max_steps < 1) throw Error("rollout: max_steps must be >= 1");
  Episode episode;
  StateVector s = env.reset(rng);
  for (int t = 0; t < max_steps; ++t) {
    SampledAction sampled = sample_action(policy, env.schemas(), s, rng);
    StepResult result = env.step(s, sampled.action, rng);
    if (!result.next_state.allFinite() || !std::isfinite(result.reward)) {
      throw Error(env.name() + ": non-finite state or reward at step " + std::to_string(t));
    }
    const bool terminal = result.terminal;
    episode.transitions.push_back(Transition{std::move(s), std::move(sampled.action),
                                             std::move(sampled.raw_params), result.reward,
                                             result.next_state, terminal});
    if (terminal) return episode;
    s = std::move(result.next_state);
  }
  episode.truncated = true;
  return episode;
}

std::pair<double, double> mean_and_std_error(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {0.0, 0.0};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return {*lo, 0.0};  // sum / n can be off by an ulp
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double stddev = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, stddev / std::sqrt(static_cast<double>(n))};
}

ReturnEstimate estimate_J(const Environment& env, const CompositePolicy& policy, int n_episodes, double gamma,
                          int max_steps, Rng& rng) {
  if (n_episodes < 1) throw Error("estimate_J: n_episodes must be >= 1");
  ReturnEstimate est;
  est.returns.reserve(n_episodes);
  double success = 0.0;
  for (int i = 0; i < n_episodes; ++i) {
    Episode ep = rollout(env, policy, max_steps, rng);
    est.returns.push_back(discounted_return(ep, gamma));
    success += env.success(ep);
  }
  std::tie(est.mean, est.std_error) = mean_and_std_error(est.returns);
  est.success = success / n_episodes;
  return est;
}

}  // namespace qpamdp
