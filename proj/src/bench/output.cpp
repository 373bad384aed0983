#include "qpamdp/bench/output.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace qpamdp::bench {

using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <class M>
json matrix_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from(const json& a, Eigen::Index expected, const std::string& what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != expected) {
    throw DimensionMismatch(what, expected, a.is_array() ? static_cast<Eigen::Index>(a.size()) : -1);
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = a[i].get<double>();
  return v;
}

}  // namespace

std::string curve_csv(const AggregateCurve& curve) {
  std::string s = std::string(kCurveHeader) + "\n";
  for (const auto& p : curve.points) {
    s += std::to_string(p.episodes) + "," + format_double(p.mean) + "," + format_double(p.std_error) + "\n";
  }
  return s;
}

AggregateCurve parse_curve_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kCurveHeader) throw Error("curve.csv: expected header '" + std::string(kCurveHeader) + "'");
  AggregateCurve out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = split(lines[i], ',');
    if (cols.size() != 3) throw Error("curve.csv:" + std::to_string(i + 1) + ": expected 3 columns");
    out.points.push_back({std::stoll(cols[0]), parse_double(cols[1]), parse_double(cols[2])});
  }
  return out;
}

AggregateCurve read_curve_csv(const fs::path& path) { return parse_curve_csv(read_text(path)); }

std::string runs_csv(const std::vector<RunRecord>& records) {
  std::string s = std::string(kRunsHeader) + "\n";
  for (const auto& r : records) {
    if (!r.ok()) continue;
    for (const auto& p : r.curve.points) {
      s += std::to_string(r.index) + "," + std::to_string(r.seed) + "," + std::to_string(p.iteration) + "," +
           std::to_string(p.episodes) + "," + format_double(p.success) + "," + format_double(p.mean_return) + "," +
           format_double(p.std_error) + "\n";
    }
  }
  return s;
}

std::vector<LearningCurve> parse_runs_csv(const std::string& text, const std::string& source) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kRunsHeader) {
    throw Error(source + ": expected header '" + std::string(kRunsHeader) + "'");
  }
  std::map<long long, LearningCurve> by_run;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = split(lines[i], ',');
    if (cols.size() != 7) throw Error(source + ":" + std::to_string(i + 1) + ": expected 7 columns");
    try {
      CurvePoint p;
      p.iteration = std::stoi(cols[2]);
      p.episodes = std::stoll(cols[3]);
      p.success = parse_double(cols[4]);
      p.mean_return = parse_double(cols[5]);
      p.std_error = parse_double(cols[6]);
      by_run[std::stoll(cols[0])].points.push_back(p);
    } catch (const std::exception& e) {
      throw Error(source + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  std::vector<LearningCurve> out;
  for (auto& [run, curve] : by_run) out.push_back(std::move(curve));
  return out;
}

std::vector<LearningCurve> read_runs_csv(const fs::path& path) {
  return parse_runs_csv(read_text(path), path.string());
}

std::string episode_json(const Episode& episode, int run, int episode_index) {
  json states = json::array();
  json actions = json::array();
  json rewards = json::array();
  for (const auto& t : episode.transitions) {
    states.push_back(vector_json(t.state));
    actions.push_back({{"id", t.action.id}, {"params", vector_json(t.action.params)}});
    rewards.push_back(t.reward);
  }
  if (!episode.empty()) states.push_back(vector_json(episode.transitions.back().next_state));
  const bool terminal = !episode.empty() && episode.transitions.back().terminal;
  json j = {{"run", run},         {"episode", episode_index}, {"states", states},
            {"actions", actions}, {"rewards", rewards},       {"terminal", terminal},
            {"truncated", episode.truncated}};
  return j.dump();
}

std::string checkpoint_json(const ExperimentConfig& cfg, const RunRecord& record) {
  if (!record.policy) throw Error("checkpoint: run " + std::to_string(record.index) + " has no policy");
  const CompositePolicy& pi = *record.policy;
  json theta = json::array();
  json variances = json::array();
  for (int a = 0; a < pi.parameters.num_actions(); ++a) {
    theta.push_back(matrix_json(pi.parameters.theta(a)));
    variances.push_back(vector_json(pi.parameters.variances(a)));
  }
  const auto& basis = pi.phi->basis;
  json j = {{"env", cfg.env},
            {"method", method_name(cfg.method)},
            {"run", record.index},
            {"seed", record.seed},
            {"temperature", pi.discrete.temperature},
            {"basis",
             {{"order", basis.order()},
              {"max_nonzero", basis.max_nonzero()},
              {"excluded_dims", basis.excluded_dims()},
              {"size", basis.size()}}},
            {"omega", matrix_json(pi.q.weights)},
            {"theta", theta},
            {"variances", variances},
            {"config", cfg.to_text()}};
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: ") + e.what());
  }
  Checkpoint c;
  try {
    c.config = parse_config(j.at("config").get<std::string>(), "checkpoint config");
    c.run = j.at("run").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const envs::Domain domain = make_domain(c.config);
    c.policy = domain.initial_policy();

    const json& omega = j.at("omega");
    RowMatrix& w = c.policy.q.weights;
    if (!omega.is_array() || static_cast<Eigen::Index>(omega.size()) != w.rows()) {
      throw DimensionMismatch("checkpoint omega rows", w.rows(), omega.is_array() ? omega.size() : -1);
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) w.row(r) = vector_from(omega[r], w.cols(), "checkpoint omega row");

    const json& theta = j.at("theta");
    const json& var = j.at("variances");
    const int k = c.policy.parameters.num_actions();
    if (!theta.is_array() || static_cast<int>(theta.size()) != k) throw DimensionMismatch("checkpoint theta", k, theta.size());
    if (!var.is_array() || static_cast<int>(var.size()) != k) throw DimensionMismatch("checkpoint variances", k, var.size());
    for (int a = 0; a < k; ++a) {
      Matrix m = c.policy.parameters.theta(a);
      if (static_cast<Eigen::Index>(theta[a].size()) != m.rows()) {
        throw DimensionMismatch("checkpoint theta rows", m.rows(), theta[a].size());
      }
      for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) = vector_from(theta[a][r], m.cols(), "checkpoint theta row");
      c.policy.parameters.set_theta(a, m);
      c.policy.parameters.set_variances(a, vector_from(var[a], m.rows(), "checkpoint variances"));
    }
    c.policy.discrete.temperature = j.at("temperature").get<double>();
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: ") + e.what());
  }
  return c;
}

Checkpoint load_checkpoint(const fs::path& path) {
  try {
    return parse_checkpoint(read_text(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<Episode> trace_checkpoint(const Checkpoint& ckpt, int episodes, std::uint64_t seed) {
  const envs::Domain domain = make_domain(ckpt.config);
  Rng rng(seed);
  std::vector<Episode> out;
  for (int e = 0; e < episodes; ++e) out.push_back(rollout(*domain.env, ckpt.policy, ckpt.config.max_steps(), rng));
  return out;
}

std::vector<Episode> final_traces(const ExperimentConfig& cfg, const RunRecord& record) {
  if (!record.policy || cfg.trace_episodes == 0) return {};
  const envs::Domain domain = make_domain(cfg);
  Rng rng(mix_seed(record.seed, 0x7472616365ULL));  // "trace"
  std::vector<Episode> out;
  for (int e = 0; e < cfg.trace_episodes; ++e) {
    out.push_back(rollout(*domain.env, *record.policy, cfg.max_steps(), rng));
  }
  return out;
}

std::vector<fs::path> emit_outputs(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                                   const AggregateCurve& aggregate, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "checkpoints", ec);
  if (ec) throw Error("cannot create " + (out_dir / "checkpoints").string() + ": " + ec.message());

  std::vector<fs::path> written;
  auto put = [&](const fs::path& p, const std::string& text) {
    write_text(p, text);
    written.push_back(p);
  };

  put(out_dir / "curve.csv", curve_csv(aggregate));
  put(out_dir / "runs.csv", runs_csv(records));

  std::string traces;
  for (const auto& r : records) {
    const auto eps = final_traces(cfg, r);
    for (std::size_t e = 0; e < eps.size(); ++e) traces += episode_json(eps[e], r.index, static_cast<int>(e)) + "\n";
  }
  put(out_dir / "traces.jsonl", traces);

  std::string manifest = "# resolved experiment configuration; seeds";
  for (const auto& r : records) manifest += " " + std::to_string(r.seed);
  manifest += "\n" + cfg.to_text();
  put(out_dir / "manifest.cfg", manifest);

  std::string failures;
  for (const auto& r : records) {
    if (r.ok()) {
      char name[32];
      std::snprintf(name, sizeof name, "run-%03d.json", r.index);
      put(out_dir / "checkpoints" / name, checkpoint_json(cfg, r));
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures += std::to_string(r.index) + "," + std::to_string(r.seed) + "," + msg + "\n";
    }
  }
  if (!failures.empty()) {
    put(out_dir / "failures.csv", "run,seed,error\n" + failures);
  } else {
    fs::remove(out_dir / "failures.csv", ec);
  }
  return written;
}

}  // namespace qpamdp::bench
