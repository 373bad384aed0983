#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "qpamdp/bench/output.hpp"

using namespace qpamdp;
using namespace qpamdp::bench;
namespace fs = std::filesystem;

namespace {

LearningCurve curve_of(std::vector<std::pair<std::int64_t, double>> pts) {
  LearningCurve c;
  int it = 0;
  for (auto [e, s] : pts) c.points.push_back(CurvePoint{it++, e, s, s, 0.0});
  return c;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qpamdp-test-" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_toy(Method m) {
  ExperimentConfig c = parse_config("env = toy\nmethod = " + method_name(m) +
                                    "\nruns = 3\nmax_episodes = 1500\ncheckpoint_interval = 500\neval.episodes = 20\n");
  return c;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("minimal config gets every default") {
    for (const auto& env : environment_names()) {
      for (Method m : {Method::kQPamdp1, Method::kQPamdpInf, Method::kEnacDirect, Method::kFixedSarsa}) {
        const auto c = parse_config("env = " + env + "\nmethod = " + method_name(m) + "\n");
        const auto d = default_config(env, m);
        CHECK(c.to_text() == d.to_text());
        CHECK(c.problems().empty());
        CHECK(c.qpamdp.k == (m == Method::kQPamdpInf ? QPamdpConfig::kInfinity : 1));
      }
    }
    const auto g = parse_config("env = goal\n");
    CHECK(g.runs == 20);
    CHECK(g.eval_episodes == 100);
    CHECK(g.qpamdp.sarsa.episodes_per_call == 50);
    CHECK(g.qpamdp.enac.batch_episodes == 50);
    CHECK(g.basis_order == 2);
    CHECK(parse_config("env = platform\n").basis_order == 4);
    CHECK(g.goal.max_steps == 200);
    CHECK(parse_config("env = platform\n").platform.max_steps == 200);
  }

  TEST_CASE("config round-trips through its text form") {
    auto c = parse_config("env = platform\nmethod = qpamdp-inf\nsarsa.alpha = 0.0123\nenv.gap_widths = 4.5, 6\n");
    const auto again = parse_config(c.to_text());
    CHECK(again.to_text() == c.to_text());
    CHECK(again.qpamdp.sarsa.alpha == 0.0123);
    CHECK(again.platform.gap_widths[0] == 4.5);
    CHECK(again.method == Method::kQPamdpInf);
  }

  TEST_CASE("runs = 0 names the field") {
    const auto msg = config_error("env = toy\nruns = 0\n");
    CHECK(msg.find("runs") != std::string::npos);
  }

  TEST_CASE("unknown key suggests the nearest known key") {
    const auto msg = config_error("env = goal\nlerning_rate = 0.1\n");
    CHECK(msg.find("test.cfg:2:") != std::string::npos);
    CHECK(msg.find("lerning_rate") != std::string::npos);
    CHECK(msg.find("sarsa.alpha") != std::string::npos);
    CHECK(nearest_key("sarsa.lamda", "goal") == "sarsa.lambda");
    CHECK(nearest_key("env.platform_length", "platform") == "env.platform_lengths");
    CHECK(edit_distance("kitten", "sitting") == 3);
  }

  TEST_CASE("every problem is reported with its line") {
    const auto msg = config_error("env = goal\nmethod = best\nruns = x\nruns = 2\nbogus\npolicy.temperature = -1\n");
    CHECK(msg.find("test.cfg:2:") != std::string::npos);
    CHECK(msg.find("unknown method") != std::string::npos);
    CHECK(msg.find("test.cfg:3:") != std::string::npos);
    CHECK(msg.find("test.cfg:4:") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
    CHECK(msg.find("test.cfg:5:") != std::string::npos);
    CHECK(msg.find("policy.temperature") != std::string::npos);
    CHECK(config_error("env = mars\n").find("unknown environment") != std::string::npos);
    try {
      parse_config("runs = 0\neval.episodes = 0\nsarsa.lambda = 2\n");
      FAIL("expected error");
    } catch (const ConfigError& e) {
      CHECK(e.problems().size() == 3);
    }
  }

  TEST_CASE("load_config reports a missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
  }

  TEST_CASE("shipped configs load") {
    const fs::path dir = fs::path(QPAMDP_SOURCE_DIR) / "configs";
    int n = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".cfg") continue;
      CAPTURE(entry.path().string());
      const auto c = load_config(entry.path());
      CHECK(entry.path().stem().string() == c.env + "-" + method_name(c.method));
      ++n;
    }
    CHECK(n == 12);
  }

  TEST_CASE("format_double is shortest round-trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 0.0, 123456789.125}) CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK_THROWS(parse_double("1.5x"));
  }

  TEST_CASE("aggregate examples") {
    const auto two = aggregate_curves({curve_of({{0, 0.3}}), curve_of({{0, 0.5}})});
    CHECK(two.points[0].mean == doctest::Approx(0.4));
    CHECK(two.points[0].std_error == doctest::Approx(0.1));
    const auto same = aggregate_curves({curve_of({{0, 0.2}, {10, 0.7}}), curve_of({{0, 0.2}, {10, 0.7}})});
    CHECK(same.points[0].std_error == 0.0);
    CHECK(same.points[1].std_error == 0.0);
    const auto one = aggregate_curves({curve_of({{0, 0.9}})});
    CHECK(one.points[0].std_error == 0.0);
    CHECK(one.n_runs == 1);
    CHECK_THROWS(aggregate_curves({curve_of({{0, 0.1}}), curve_of({{5, 0.1}})}));
    CHECK_THROWS(aggregate_curves({curve_of({{0, 0.1}}), curve_of({{0, 0.1}, {5, 0.2}})}));
    CHECK_THROWS(aggregate_curves({}));
  }

  TEST_CASE("aggregation is permutation invariant") {
    Rng rng(1);
    std::vector<LearningCurve> curves;
    for (int r = 0; r < 7; ++r) curves.push_back(curve_of({{0, rng.uniform()}, {100, rng.uniform()}}));
    const auto a = aggregate_curves(curves);
    std::reverse(curves.begin(), curves.end());
    std::swap(curves[1], curves[4]);
    const auto b = aggregate_curves(curves);
    for (int i = 0; i < 2; ++i) {
      CHECK(a.points[i].mean == doctest::Approx(b.points[i].mean).epsilon(1e-15));
      CHECK(a.points[i].std_error == doctest::Approx(b.points[i].std_error).epsilon(1e-12));
    }
  }

  TEST_CASE("curve.csv round trip") {
    AggregateCurve c;
    c.points = {{0, 0.1, 0.0}, {2000, 1.0 / 3.0, 0.0123456789}, {4000, 0.35, 1e-17}};
    const std::string text = curve_csv(c);
    CHECK(text.rfind("episodes,mean,stderr\n", 0) == 0);
    const auto back = parse_curve_csv(text);
    REQUIRE(back.points.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(back.points[i].episodes == c.points[i].episodes);
      CHECK(back.points[i].mean == c.points[i].mean);
      CHECK(back.points[i].std_error == c.points[i].std_error);
    }
    CHECK_THROWS(parse_curve_csv("episodes,mean\n1,2\n"));
    CHECK_THROWS(parse_curve_csv("episodes,mean,stderr\n1,2\n"));
  }

  TEST_CASE("runs.csv round trip") {
    std::vector<RunRecord> recs(2);
    for (int r = 0; r < 2; ++r) {
      recs[r].index = r;
      recs[r].seed = 10 + r;
      recs[r].curve = curve_of({{0, 0.1 * r}, {50, 0.25 + r}});
    }
    const auto back = parse_runs_csv(runs_csv(recs));
    REQUIRE(back.size() == 2);
    CHECK(back[1].points[1].success == 1.25);
    CHECK(back[1].points[1].episodes == 50);
    CHECK_THROWS(parse_runs_csv("run,seed\n"));
  }

  TEST_CASE("episode json") {
    const auto d = envs::make_platform_domain();
    Rng rng(2);
    const Episode ep = rollout(*d.env, d.initial_policy(), 200, rng);
    const auto j = nlohmann::json::parse(episode_json(ep, 3, 1));
    CHECK(j["run"] == 3);
    CHECK(j["states"].size() == ep.size() + 1);
    CHECK(j["actions"].size() == ep.size());
    CHECK(j["rewards"].size() == ep.size());
    CHECK(j["actions"][0].contains("id"));
    CHECK(j["actions"][0]["params"].size() == 1);
    CHECK(j["terminal"].get<bool>() == ep.transitions.back().terminal);
  }

  TEST_CASE("runs are deterministic and seeds separate them") {
    auto cfg = small_toy(Method::kQPamdp1);
    cfg.runs = 2;
    RunOptions one;
    one.parallel = 1;
    RunOptions two;
    two.parallel = 2;
    const auto a = run_experiment(cfg, one);
    const auto b = run_experiment(cfg, two);
    REQUIRE(a.size() == 2);
    for (int r = 0; r < 2; ++r) {
      CHECK(a[r].ok());
      CHECK(a[r].seed == cfg.seed + r);
      CHECK(runs_csv({a[r]}) == runs_csv({b[r]}));
      CHECK(a[r].policy->parameters.flat_theta() == b[r].policy->parameters.flat_theta());
    }
    CHECK(runs_csv({a[0]}).substr(60) != runs_csv({a[1]}).substr(60));
    CHECK(a[0].policy->parameters.flat_theta() != a[1].policy->parameters.flat_theta());
    for (const auto& r : a) {
      REQUIRE(r.curve.size() == 4);
      for (std::size_t i = 0; i < r.curve.size(); ++i) CHECK(r.curve.points[i].episodes == 500 * std::int64_t(i));
      CHECK(r.episodes_consumed == 1500);
    }
  }

  TEST_CASE("a failing run is recorded and the others continue") {
    auto cfg = parse_config("env = goal\nmethod = fixed-sarsa\nruns = 2\nmax_episodes = 200\ncheckpoint_interval = 100\n"
                            "eval.episodes = 5\nsarsa.alpha = 50\nsarsa.divergence_cap = 1\n");
    const auto recs = run_experiment(cfg);
    REQUIRE(recs.size() == 2);
    for (const auto& r : recs) {
      CHECK_FALSE(r.ok());
      CHECK(r.error.find("sarsa") != std::string::npos);
    }
    CHECK_THROWS(aggregate_runs(recs));
  }

  TEST_CASE("emitted files, checkpoints and manifest replay") {
    const auto cfg = small_toy(Method::kQPamdpInf);
    const auto recs = run_experiment(cfg);
    const fs::path dir = scratch_dir("emit");
    emit_outputs(cfg, recs, aggregate_runs(recs), dir);
    for (const char* f : {"curve.csv", "runs.csv", "traces.jsonl", "manifest.cfg"}) CHECK(fs::exists(dir / f));
    CHECK(fs::exists(dir / "checkpoints" / "run-002.json"));
    CHECK_FALSE(fs::exists(dir / "failures.csv"));

    const auto curve = read_curve_csv(dir / "curve.csv");
    const auto agg = aggregate_runs(recs);
    REQUIRE(curve.points.size() == agg.points.size());
    for (std::size_t i = 0; i < agg.points.size(); ++i) CHECK(curve.points[i].mean == agg.points[i].mean);
    CHECK(aggregate_curves(read_runs_csv(dir / "runs.csv")).points.back().mean == agg.points.back().mean);

    const auto replay_cfg = load_config(dir / "manifest.cfg");
    const auto replay = run_experiment(replay_cfg);
    const fs::path dir2 = scratch_dir("emit2");
    emit_outputs(replay_cfg, replay, aggregate_runs(replay), dir2);
    for (const char* f : {"curve.csv", "runs.csv", "traces.jsonl", "manifest.cfg", "checkpoints/run-000.json"}) {
      CHECK(read_text(dir / f) == read_text(dir2 / f));
    }

    const auto ck = load_checkpoint(dir / "checkpoints" / "run-001.json");
    CHECK(ck.run == 1);
    CHECK(ck.seed == cfg.seed + 1);
    CHECK(ck.policy.parameters.flat_theta() == recs[1].policy->parameters.flat_theta());
    CHECK(ck.policy.q.weights == recs[1].policy->q.weights);
    const auto eps = trace_checkpoint(ck, 4, 7);
    CHECK(eps.size() == 4);
    CHECK_THROWS(parse_checkpoint("{\"config\": 1}"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
  }

  TEST_CASE("toy q-pamdp runs end at the oracle parameter") {
    const double var = 0.01;
    const envs::ToyPamdp toy;
    for (Method m : {Method::kQPamdp1, Method::kQPamdpInf}) {
      auto cfg = default_config("toy", m);
      cfg.runs = 5;
      const auto recs = run_experiment(cfg);
      for (const auto& r : recs) {
        REQUIRE(r.ok());
        Eigen::Index a;
        r.policy->q.weights.col(0).maxCoeff(&a);
        // brute force over the mean of the greedy action
        double best_x = 0.0, best = -1e300;
        for (double x = -2.0; x <= 2.0 + 1e-12; x += 1e-3) {
          const double v = toy.reward(static_cast<ActionId>(a), x) - var;
          if (v > best) {
            best = v;
            best_x = x;
          }
        }
        CHECK(a == 1);
        CHECK(std::abs(r.policy->parameters.theta(static_cast<ActionId>(a))(0, 0) - best_x) < 0.05);
      }
    }
  }

  TEST_CASE("converged goal policy shoots once the keeper is beaten sideways") {
    auto cfg = default_config("goal", Method::kQPamdp1);
    cfg.runs = 1;
    cfg.checkpoint_interval = 0;
    cfg.eval_episodes = 1;
    const auto rec = run_single(cfg, 0);
    REQUIRE(rec.ok());
    const auto d = make_domain(cfg);
    const double mid = 0.5 * cfg.goal.field_width;
    Rng rng(5);
    int goals = 0, beaten = 0;
    for (int e = 0; e < 200; ++e) {
      const Episode ep = rollout(*d.env, *rec.policy, cfg.max_steps(), rng);
      if (d.env->success(ep) < 1.0) continue;
      ++goals;
      const auto& last = ep.transitions.back();
      CHECK(last.action.id != envs::kKickTo);
      const double px = last.state[envs::goal_index::kPlayerX];
      const double kx = last.state[envs::goal_index::kKeeperX];
      beaten += std::abs(px - mid) > std::abs(kx - mid);
    }
    REQUIRE(goals >= 20);
    CHECK(beaten == goals);
  }
}
