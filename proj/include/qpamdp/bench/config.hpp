#pragma once

// Experiment configuration: a flat `key = value` text format with dotted
// section keys. Every key has a default that depends on the environment, so
// a file naming only `env` and `method` is complete.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpamdp/approx.hpp"
#include "qpamdp/envs/domain.hpp"
#include "qpamdp/learn.hpp"

namespace qpamdp::bench {

enum class Method { kQPamdp1, kQPamdpInf, kEnacDirect, kFixedSarsa };

std::string method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
const std::vector<std::string>& environment_names();

struct ExperimentConfig {
  std::string env = "goal";
  Method method = Method::kQPamdp1;
  int runs = 20;
  std::uint64_t seed = 1;  // run i uses seed + i
  std::int64_t checkpoint_interval = 2000;  // training episodes; 0 = after every iteration
  std::int64_t max_episodes = 30000;        // training budget per run; 0 = unlimited
  int iterations = 1000000;                 // cap on outer iterations
  int eval_episodes = 100;
  int trace_episodes = 1;  // final-policy episodes per run written to traces.jsonl

  double temperature = 1.0;
  double variance_scale = 1.0;  // multiplies every default parameter-policy variance
  int basis_order = 2;
  int basis_max_nonzero = 2;

  QPamdpConfig qpamdp;  // k comes from the method; sarsa and enac live inside

  envs::ToyConfig toy;
  envs::GoalConfig goal;
  envs::PlatformConfig platform;

  // Every violated constraint, one message per field. Empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;  // throws ConfigError with problems()

  // Canonical text form; parse_config(to_text()) reproduces this config.
  std::string to_text() const;

  int max_steps() const;  // episode cap of the selected environment
};

class ConfigError : public Error {
 public:
  ConfigError(std::string message, std::vector<std::string> problems = {});
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Tuned defaults for an environment (toy, goal, platform).
ExperimentConfig default_config(const std::string& env, Method method = Method::kQPamdp1);

ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Keys accepted for an environment, in manifest order.
std::vector<std::string> known_keys(const std::string& env);
// Closest known key by edit distance (on the full key or its last segment).
std::string nearest_key(std::string_view key, const std::string& env);
std::size_t edit_distance(std::string_view a, std::string_view b);

// Domain with the config's environment, basis, temperature and variances.
envs::Domain make_domain(const ExperimentConfig& cfg);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace qpamdp::bench
