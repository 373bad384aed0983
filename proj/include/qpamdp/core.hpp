#pragma once

// Parameterized-action MDP primitives: states, parameterized actions,
// episodes, the environment contract, rollouts and return estimation.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qpamdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using StateVector = Eigen::VectorXd;
using ActionId = int;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& what, long expected, long actual);
  long expected() const { return expected_; }
  long actual() const { return actual_; }

 private:
  long expected_;
  long actual_;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct ActionSchema {
  ActionId id = 0;
  std::string name;
  std::vector<Interval> bounds;  // one per parameter dimension

  int param_dim() const { return static_cast<int>(bounds.size()); }
};

// Throws Error if bounds are inverted or ids are not unique.
void check_schemas(std::span<const ActionSchema> schemas);

struct ParameterizedAction {
  ActionId id = 0;
  Vector params;
};

struct Transition {
  StateVector state;
  ParameterizedAction action;  // as executed, inside schema bounds
  Vector sampled_params;       // policy sample before clamping
  double reward = 0.0;
  StateVector next_state;
  bool terminal = false;
};

struct Episode {
  std::vector<Transition> transitions;
  bool truncated = false;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
  std::vector<double> rewards() const;
};

struct StepResult {
  StateVector next_state;
  double reward = 0.0;
  bool terminal = false;
};

// Seeded random stream. Identical seeds give identical draw sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();  // standard normal
  // Samples an index proportionally to non-negative weights.
  int categorical(std::span<const double> probabilities);
  // Independent stream keyed by (seed, salt).
  Rng derive(std::uint64_t salt) const;

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Environments are pure transition functions over explicit state values.
// All stochasticity flows through the Rng argument.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual const std::vector<ActionSchema>& schemas() const = 0;
  virtual StateVector reset(Rng& rng) const = 0;
  virtual StepResult step(const StateVector& s, const ParameterizedAction& action,
                          Rng& rng) const = 0;

  // Domain success metric of a single episode (default: undiscounted return).
  virtual double success(const Episode& episode) const;
  // Typical magnitude of an episode return, used to normalize plateau tests.
  virtual double return_scale() const { return 1.0; }

  int num_actions() const { return static_cast<int>(schemas().size()); }
  const ActionSchema& schema(ActionId id) const;
};

ParameterizedAction validate_action(const ActionSchema& schema, const ParameterizedAction& action);

double discounted_return(const Episode& episode, double gamma);
double discounted_return(std::span<const double> rewards, double gamma);

class CompositePolicy;

Episode rollout(const Environment& env, const CompositePolicy& policy, int max_steps, Rng& rng);

struct ReturnEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double success = 0.0;  // mean of Environment::success over the episodes
  std::vector<double> returns;
};

ReturnEstimate estimate_J(const Environment& env, const CompositePolicy& policy, int n_episodes,
                          double gamma, int max_steps, Rng& rng);

// Sample mean and standard error (stddev / sqrt(n), 0 for n == 1).
std::pair<double, double> mean_and_std_error(std::span<const double> values);

}  // namespace qpamdp
