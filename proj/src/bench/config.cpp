#include "qpamdp/bench/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace qpamdp::bench {

std::string method_name(Method m) {
  switch (m) {
    case Method::kQPamdp1: return "qpamdp1";
    case Method::kQPamdpInf: return "qpamdp-inf";
    case Method::kEnacDirect: return "enac-direct";
    case Method::kFixedSarsa: return "fixed-sarsa";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::kQPamdp1, Method::kQPamdpInf, Method::kEnacDirect, Method::kFixedSarsa}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names{"toy", "goal", "platform"};
  return names;
}

ConfigError::ConfigError(std::string message, std::vector<std::string> problems)
    : Error(std::move(message)), problems_(std::move(problems)) {}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw Error("expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

namespace {

template <class Int>
Int parse_int(std::string_view text) {
  text = trim(text);
  Int v{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw Error("expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_double(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<std::string()> get;
  std::function<void(std::string_view)> set;
};

Field real(std::string key, double& ref) {
  return {std::move(key), [&ref] { return format_double(ref); }, [&ref](std::string_view v) { ref = parse_double(v); }};
}

template <class Int>
Field integer(std::string key, Int& ref) {
  return {std::move(key), [&ref] { return std::to_string(ref); },
          [&ref](std::string_view v) { ref = parse_int<Int>(v); }};
}

template <std::size_t N>
Field fixed_list(std::string key, std::array<double, N>& ref) {
  return {key, [&ref] { return format_list({ref.begin(), ref.end()}); },
          [&ref, key](std::string_view v) {
            const auto xs = parse_list(v);
            if (xs.size() != N) throw Error("expected " + std::to_string(N) + " comma-separated numbers");
            std::copy(xs.begin(), xs.end(), ref.begin());
          }};
}

Field list(std::string key, std::vector<double>& ref) {
  return {std::move(key), [&ref] { return format_list(ref); }, [&ref](std::string_view v) { ref = parse_list(v); }};
}

Field interval(std::string key, Interval& ref) {
  return {std::move(key), [&ref] { return format_list({ref.lower, ref.upper}); },
          [&ref](std::string_view v) {
            const auto xs = parse_list(v);
            if (xs.size() != 2) throw Error("expected 'lower, upper'");
            ref = {xs[0], xs[1]};
          }};
}

std::vector<Field> env_fields(ExperimentConfig& c) {
  if (c.env == "toy") {
    auto& t = c.toy;
    return {list("env.c", t.c), list("env.mu", t.mu), interval("env.bounds", t.bounds)};
  }
  if (c.env == "goal") {
    auto& g = c.goal;
    return {real("env.field_width", g.field_width),
            real("env.field_length", g.field_length),
            real("env.goal_width", g.goal_width),
            real("env.player_speed", g.player_speed),
            real("env.keeper_speed", g.keeper_speed),
            real("env.kick_speed", g.kick_speed),
            real("env.friction", g.friction),
            real("env.noise_fraction", g.noise_fraction),
            real("env.keeper_start_distance", g.keeper_start_distance),
            real("env.keeper_area_width", g.keeper_area_width),
            real("env.keeper_area_depth", g.keeper_area_depth),
            real("env.catch_radius", g.catch_radius),
            real("env.control_radius", g.control_radius),
            integer("env.tick_cap", g.tick_cap),
            integer("env.max_steps", g.max_steps)};
  }
  auto& p = c.platform;
  return {fixed_list("env.platform_lengths", p.platform_lengths),
          fixed_list("env.gap_widths", p.gap_widths),
          real("env.patrol_fraction", p.patrol_fraction),
          real("env.enemy_speed", p.enemy_speed),
          real("env.enemy_width", p.enemy_width),
          real("env.enemy_height", p.enemy_height),
          real("env.agent_width", p.agent_width),
          real("env.run_period", p.run_period),
          real("env.run_accel", p.run_accel),
          real("env.hop_apex", p.hop_apex),
          real("env.hop_time", p.hop_time),
          real("env.leap_apex", p.leap_apex),
          real("env.leap_time", p.leap_time),
          real("env.dt", p.dt),
          interval("env.run_dx", p.run_dx),
          interval("env.hop_dx", p.hop_dx),
          interval("env.leap_dx", p.leap_dx),
          integer("env.max_steps", p.max_steps)};
}

// env and method are handled separately: they select the defaults.
std::vector<Field> fields(ExperimentConfig& c) {
  auto& q = c.qpamdp;
  std::vector<Field> f{
      integer("runs", c.runs),
      integer("seed", c.seed),
      integer("checkpoint_interval", c.checkpoint_interval),
      integer("max_episodes", c.max_episodes),
      integer("iterations", c.iterations),
      integer("eval.episodes", c.eval_episodes),
      integer("trace.episodes", c.trace_episodes),
      real("policy.temperature", c.temperature),
      real("policy.variance_scale", c.variance_scale),
      integer("basis.order", c.basis_order),
      integer("basis.max_nonzero", c.basis_max_nonzero),
      real("sarsa.alpha", q.sarsa.alpha),
      real("sarsa.lambda", q.sarsa.lambda),
      real("sarsa.gamma", q.sarsa.gamma),
      integer("sarsa.episodes_per_call", q.sarsa.episodes_per_call),
      integer("sarsa.burn_in_episodes", q.sarsa.initial_burn_in_episodes),
      real("sarsa.divergence_cap", q.sarsa.divergence_cap),
      integer("enac.batch_episodes", q.enac.batch_episodes),
      real("enac.step_size", q.enac.step_size),
      real("enac.ridge", q.enac.ridge),
      real("enac.gamma", q.enac.gamma),
      real("qpamdp.plateau_tolerance", q.plateau_tolerance),
      integer("qpamdp.plateau_patience", q.plateau_patience),
      integer("qpamdp.inner_cap", q.inner_cap),
      real("qpamdp.theta_tolerance", q.theta_tolerance),
  };
  for (auto& e : env_fields(c)) f.push_back(std::move(e));
  return f;
}

void sync_derived(ExperimentConfig& c) {
  c.qpamdp.k = c.method == Method::kQPamdpInf ? QPamdpConfig::kInfinity : 1;
  c.qpamdp.iterations = c.iterations;
  c.qpamdp.eval_episodes = c.eval_episodes;
  c.qpamdp.sarsa.max_steps = c.max_steps();
  c.qpamdp.enac.max_steps = c.max_steps();
}

bool is_known_env(const std::string& env) {
  const auto& names = environment_names();
  return std::find(names.begin(), names.end(), env) != names.end();
}

}  // namespace

int ExperimentConfig::max_steps() const {
  if (env == "goal") return goal.max_steps;
  if (env == "platform") return platform.max_steps;
  return 1;
}

ExperimentConfig default_config(const std::string& env, Method method) {
  if (!is_known_env(env)) throw ConfigError("unknown environment '" + env + "' (known: toy, goal, platform)");
  ExperimentConfig c;
  c.env = env;
  c.method = method;
  auto& q = c.qpamdp;
  if (env == "toy") {
    c.checkpoint_interval = 500;
    c.max_episodes = 8000;
    c.temperature = 0.5;
    c.basis_order = 1;
    c.basis_max_nonzero = 1;
    q.sarsa.alpha = 0.1;
    q.sarsa.initial_burn_in_episodes = 200;
    q.enac.step_size = 10.0;
  } else if (env == "goal") {
    c.temperature = 3.0;
    q.sarsa.alpha = 0.005;
    q.sarsa.lambda = 0.5;
    q.enac.step_size = 1.0;
  } else {
    c.temperature = 0.01;
    c.basis_order = 4;
    q.sarsa.alpha = 0.002;
    q.sarsa.lambda = 0.9;
    q.enac.step_size = 1.0;
  }
  sync_derived(c);
  return c;
}

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out;
  auto need = [&out](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  need(is_known_env(env), "env: unknown environment '" + env + "'");
  need(runs >= 1, "runs: must be >= 1");
  need(checkpoint_interval >= 0, "checkpoint_interval: must be >= 0");
  need(max_episodes >= 0, "max_episodes: must be >= 0");
  need(iterations >= 0, "iterations: must be >= 0");
  need(eval_episodes >= 1, "eval.episodes: must be >= 1");
  need(trace_episodes >= 0, "trace.episodes: must be >= 0");
  need(temperature > 0.0, "policy.temperature: must be > 0");
  need(variance_scale > 0.0, "policy.variance_scale: must be > 0");
  need(basis_order >= 1, "basis.order: must be >= 1");
  need(basis_max_nonzero >= 1, "basis.max_nonzero: must be >= 1");
  const auto& s = qpamdp.sarsa;
  need(s.alpha > 0.0, "sarsa.alpha: must be > 0");
  need(s.lambda >= 0.0 && s.lambda <= 1.0, "sarsa.lambda: must be in [0, 1]");
  need(s.gamma >= 0.0 && s.gamma <= 1.0, "sarsa.gamma: must be in [0, 1]");
  need(s.episodes_per_call >= 1, "sarsa.episodes_per_call: must be >= 1");
  need(s.initial_burn_in_episodes >= 1, "sarsa.burn_in_episodes: must be >= 1");
  need(s.divergence_cap > 0.0, "sarsa.divergence_cap: must be > 0");
  const auto& e = qpamdp.enac;
  need(e.batch_episodes >= 2, "enac.batch_episodes: must be >= 2");
  need(e.step_size > 0.0, "enac.step_size: must be > 0");
  need(e.ridge >= 0.0, "enac.ridge: must be >= 0");
  need(e.gamma >= 0.0 && e.gamma <= 1.0, "enac.gamma: must be in [0, 1]");
  need(qpamdp.plateau_tolerance >= 0.0, "qpamdp.plateau_tolerance: must be >= 0");
  need(qpamdp.plateau_patience >= 1, "qpamdp.plateau_patience: must be >= 1");
  need(qpamdp.inner_cap >= 1, "qpamdp.inner_cap: must be >= 1");
  need(qpamdp.theta_tolerance >= 0.0, "qpamdp.theta_tolerance: must be >= 0");
  try {
    if (env == "toy") toy.validate();
    if (env == "goal") goal.validate();
    if (env == "platform") platform.validate();
  } catch (const Error& err) {
    out.push_back(std::string("env: ") + err.what());
  }
  return out;
}

void ExperimentConfig::validate() const {
  auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& s : p) msg += "\n  " + s;
  throw ConfigError(msg, std::move(p));
}

std::string ExperimentConfig::to_text() const {
  ExperimentConfig copy = *this;
  std::ostringstream os;
  os << "env = " << env << "\n";
  os << "method = " << method_name(method) << "\n";
  for (const auto& f : fields(copy)) os << f.key << " = " << f.get() << "\n";
  return os.str();
}

std::vector<std::string> known_keys(const std::string& env) {
  ExperimentConfig c = default_config(env);
  std::vector<std::string> keys{"env", "method"};
  for (const auto& f : fields(c)) keys.push_back(f.key);
  return keys;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest_key(std::string_view key, const std::string& env) {
  // common names for keys that are spelled differently here
  static const std::pair<const char*, const char*> aliases[] = {
      {"learning_rate", "sarsa.alpha"}, {"lr", "sarsa.alpha"},           {"tau", "policy.temperature"},
      {"n_runs", "runs"},               {"base_seed", "seed"},           {"burn_in", "sarsa.burn_in_episodes"},
      {"batch_size", "enac.batch_episodes"}, {"order", "basis.order"}, {"budget", "max_episodes"},
  };
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& [alias, target] : aliases) {
    const std::size_t d = edit_distance(key, alias);
    if (d < best_d && d <= std::string_view(alias).size() / 3) {
      best_d = d;
      best = target;
    }
  }
  for (const auto& k : known_keys(is_known_env(env) ? env : "goal")) {
    const auto dot = k.rfind('.');
    std::size_t d = edit_distance(key, k);
    if (dot != std::string::npos) d = std::min(d, edit_distance(key, std::string_view(k).substr(dot + 1)));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  struct Line {
    int number;
    std::string key;
    std::string value;
  };
  std::vector<Line> lines;
  std::vector<std::string> errors;
  int number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    const std::string where = source + ":" + std::to_string(number) + ": ";
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected 'key = value', got '" + std::string(raw) + "'");
      continue;
    }
    Line l{number, std::string(trim(raw.substr(0, eq))), std::string(trim(raw.substr(eq + 1)))};
    if (l.key.empty()) {
      errors.push_back(where + "missing key before '='");
      continue;
    }
    lines.push_back(std::move(l));
  }

  std::string env = "goal";
  Method method = Method::kQPamdp1;
  std::map<std::string, int> seen;
  for (const auto& l : lines) {
    const std::string where = source + ":" + std::to_string(l.number) + ": ";
    if (auto [it, fresh] = seen.emplace(l.key, l.number); !fresh) {
      errors.push_back(where + "duplicate key '" + l.key + "' (first set on line " + std::to_string(it->second) + ")");
    }
    if (l.key == "env") {
      if (is_known_env(l.value)) {
        env = l.value;
      } else {
        errors.push_back(where + "unknown environment '" + l.value + "' (known: toy, goal, platform)");
      }
    } else if (l.key == "method") {
      if (auto m = parse_method(l.value)) {
        method = *m;
      } else {
        errors.push_back(where + "unknown method '" + l.value +
                         "' (known: qpamdp1, qpamdp-inf, enac-direct, fixed-sarsa)");
      }
    }
  }

  ExperimentConfig cfg = default_config(env, method);
  std::map<std::string, Field> table;
  for (auto& f : fields(cfg)) table.emplace(f.key, std::move(f));
  for (const auto& l : lines) {
    if (l.key == "env" || l.key == "method") continue;
    const std::string where = source + ":" + std::to_string(l.number) + ": ";
    auto it = table.find(l.key);
    if (it == table.end()) {
      errors.push_back(where + "unknown key '" + l.key + "'; did you mean '" + nearest_key(l.key, env) + "'?");
      continue;
    }
    try {
      it->second.set(l.value);
    } catch (const Error& e) {
      errors.push_back(where + l.key + ": " + e.what());
    }
  }
  sync_derived(cfg);

  // line-tagged messages first, in file order
  auto line_of = [&source](const std::string& e) {
    const std::string_view rest = std::string_view(e).substr(source.size() + 1);
    int n = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
    return ec == std::errc() && ptr != rest.data() ? n : std::numeric_limits<int>::max();
  };
  std::stable_sort(errors.begin(), errors.end(),
                   [&](const std::string& a, const std::string& b) { return line_of(a) < line_of(b); });
  for (const auto& p : cfg.problems()) errors.push_back(source + ": " + p);
  if (!errors.empty()) {
    std::string msg = "invalid config " + source + ":";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg, std::move(errors));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

envs::Domain make_domain(const ExperimentConfig& cfg) {
  envs::Domain d;
  if (cfg.env == "toy") {
    d = envs::make_toy_domain(cfg.toy);
  } else if (cfg.env == "goal") {
    d = envs::make_goal_domain(cfg.goal);
  } else if (cfg.env == "platform") {
    d = envs::make_platform_domain(cfg.platform);
  } else {
    throw ConfigError("unknown environment '" + cfg.env + "'");
  }
  d.basis.order = cfg.basis_order;
  d.basis.max_nonzero = cfg.basis_max_nonzero;
  d.temperature = cfg.temperature;
  for (auto& v : d.variances) v *= cfg.variance_scale;
  return d;
}

}  // namespace qpamdp::bench
