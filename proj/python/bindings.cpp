#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qpamdp/bench/output.hpp"

namespace py = pybind11;
using namespace qpamdp;
using namespace qpamdp::bench;

namespace {

Method method_from(const std::string& name) {
  auto m = parse_method(name);
  if (!m) throw py::value_error("unknown method '" + name + "'");
  return *m;
}

std::shared_ptr<const Environment> make_env(const std::string& name) {
  if (std::find(environment_names().begin(), environment_names().end(), name) == environment_names().end()) {
    throw py::value_error("unknown environment '" + name + "'");
  }
  return make_domain(default_config(name)).env;
}

py::list curve_points(const LearningCurve& c) {
  py::list out;
  for (const auto& p : c.points) {
    py::dict d;
    d["iteration"] = p.iteration;
    d["episodes"] = p.episodes;
    d["mean_return"] = p.mean_return;
    d["success"] = p.success;
    d["stderr"] = p.std_error;
    out.append(d);
  }
  return out;
}

py::dict episode_dict(const Episode& ep) {
  py::list steps;
  for (const auto& t : ep.transitions) {
    py::dict d;
    d["state"] = t.state;
    d["action"] = t.action.id;
    d["params"] = t.action.params;
    d["reward"] = t.reward;
    d["terminal"] = t.terminal;
    steps.append(d);
  }
  py::dict out;
  out["steps"] = steps;
  out["truncated"] = ep.truncated;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Q-PAMDP learners and parameterized-action benchmark domains";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
      .def_property_readonly("seed", &Rng::seed)
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("normal", &Rng::normal);

  py::class_<Environment, std::shared_ptr<Environment>>(m, "Environment")
      .def_property_readonly("name", &Environment::name)
      .def_property_readonly("state_dim", &Environment::state_dim)
      .def_property_readonly("num_actions", &Environment::num_actions)
      .def_property_readonly("actions",
                             [](const Environment& e) {
                               py::list out;
                               for (const auto& s : e.schemas()) {
                                 py::list bounds;
                                 for (const auto& b : s.bounds) bounds.append(py::make_tuple(b.lower, b.upper));
                                 out.append(py::make_tuple(s.id, s.name, bounds));
                               }
                               return out;
                             })
      .def("reset", &Environment::reset, py::arg("rng"))
      .def(
          "step",
          [](const Environment& e, const Vector& s, int action, const Vector& params, Rng& rng) {
            const auto r = e.step(s, ParameterizedAction{action, params}, rng);
            return py::make_tuple(r.next_state, r.reward, r.terminal);
          },
          py::arg("state"), py::arg("action"), py::arg("params"), py::arg("rng"));

  m.def(
      "make_env", [](const std::string& name) { return std::const_pointer_cast<Environment>(make_env(name)); },
      py::arg("name"), "Environment with default settings: toy, goal or platform.");
  m.def("environments", &environment_names);
  m.def("methods", [] {
    std::vector<std::string> out;
    for (Method x : {Method::kQPamdp1, Method::kQPamdpInf, Method::kEnacDirect, Method::kFixedSarsa}) {
      out.push_back(method_name(x));
    }
    return out;
  });

  m.def(
      "discounted_return",
      [](const std::vector<double>& rewards, double gamma) { return discounted_return(rewards, gamma); },
      py::arg("rewards"), py::arg("gamma"));
  m.def("action_probabilities", &discrete_action_probabilities, py::arg("q_values"), py::arg("temperature"));
  m.def(
      "fourier_coefficients",
      [](int n, int order, int max_nonzero, std::set<int> excluded) {
        return FourierBasis::generate(n, order, max_nonzero, excluded).coefficients();
      },
      py::arg("n"), py::arg("order"), py::arg("max_nonzero"), py::arg("excluded") = std::set<int>{});
  m.def(
      "enac_natural_gradient",
      [](const Matrix& scores, const Vector& returns, double ridge) {
        const auto g = enac_natural_gradient(scores, returns, ridge);
        return py::make_tuple(g.w, g.baseline);
      },
      py::arg("score_sums"), py::arg("returns"), py::arg("ridge") = 0.0,
      "Least squares of returns on [score sums, 1]; returns (w, baseline).");
  py::register_exception<SingularSystemError>(m, "SingularSystemError", PyExc_RuntimeError);

  m.def(
      "toy_closed_forms",
      [](const std::vector<double>& theta, const std::vector<double>& variances) {
        const envs::ToyPamdp toy;
        const auto cf = envs::toy_closed_forms(toy, theta, variances);
        py::dict d;
        d["expected_reward"] = cf.expected_reward;
        d["best_action"] = cf.best_action;
        d["H"] = cf.H;
        return d;
      },
      py::arg("theta"), py::arg("variances"));
  m.def(
      "gradient_of_H_check",
      [](const std::vector<double>& theta, const std::vector<double>& variances, double step) {
        const envs::ToyPamdp toy;
        const auto g = gradient_of_H_check(toy, theta, variances, step);
        py::dict d;
        d["analytic"] = g.analytic;
        d["finite_diff"] = g.finite_diff;
        d["rel_error"] = g.rel_error;
        d["differentiable"] = g.differentiable;
        return d;
      },
      py::arg("theta"), py::arg("variances"), py::arg("step") = 1e-5);

  py::class_<ExperimentConfig>(m, "Config")
      .def_readwrite("env", &ExperimentConfig::env)
      .def_property(
          "method", [](const ExperimentConfig& c) { return method_name(c.method); },
          [](ExperimentConfig& c, const std::string& s) { c.method = method_from(s); })
      .def_readwrite("runs", &ExperimentConfig::runs)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("max_episodes", &ExperimentConfig::max_episodes)
      .def_readwrite("checkpoint_interval", &ExperimentConfig::checkpoint_interval)
      .def_readwrite("eval_episodes", &ExperimentConfig::eval_episodes)
      .def_readwrite("temperature", &ExperimentConfig::temperature)
      .def("problems", &ExperimentConfig::problems)
      .def("validate", &ExperimentConfig::validate)
      .def("to_text", &ExperimentConfig::to_text)
      .def("__repr__",
           [](const ExperimentConfig& c) { return "<Config env=" + c.env + " method=" + method_name(c.method) + ">"; });

  m.def(
      "default_config", [](const std::string& env, const std::string& method) {
        return default_config(env, method_from(method));
      },
      py::arg("env"), py::arg("method") = "qpamdp1");
  m.def(
      "parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def(
      "load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("index", &RunRecord::index)
      .def_readonly("seed", &RunRecord::seed)
      .def_readonly("episodes_consumed", &RunRecord::episodes_consumed)
      .def_readonly("error", &RunRecord::error)
      .def_property_readonly("ok", &RunRecord::ok)
      .def_property_readonly("curve", [](const RunRecord& r) { return curve_points(r.curve); })
      .def_property_readonly("final_success", [](const RunRecord& r) {
        return r.ok() && !r.curve.empty() ? py::cast(r.curve.points.back().success) : py::none();
      });

  m.def(
      "run_experiment",
      [](const ExperimentConfig& cfg, int parallel) {
        RunOptions opt;
        opt.parallel = parallel;
        py::gil_scoped_release release;
        return run_experiment(cfg, opt);
      },
      py::arg("config"), py::arg("parallel") = 0);
  m.def(
      "aggregate",
      [](const std::vector<RunRecord>& records) {
        const auto agg = aggregate_runs(records);
        std::vector<std::tuple<std::int64_t, double, double>> out;
        for (const auto& p : agg.points) out.emplace_back(p.episodes, p.mean, p.std_error);
        return out;
      },
      py::arg("records"), "Pointwise (episodes, mean, stderr) of the success metric.");
  m.def(
      "emit_outputs",
      [](const ExperimentConfig& cfg, const std::vector<RunRecord>& records, const std::filesystem::path& out) {
        return emit_outputs(cfg, records, aggregate_runs(records), out);
      },
      py::arg("config"), py::arg("records"), py::arg("out_dir"));
  m.def(
      "trace",
      [](const std::filesystem::path& checkpoint, int episodes, std::uint64_t seed) {
        const auto ckpt = load_checkpoint(checkpoint);
        py::list out;
        for (const auto& ep : trace_checkpoint(ckpt, episodes, seed)) out.append(episode_dict(ep));
        return out;
      },
      py::arg("checkpoint"), py::arg("episodes") = 1, py::arg("seed") = 0);
}
