#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "snell/convergence.hpp"
#include "snell/experiments.hpp"
#include "snell/io.hpp"
#include "snell/procgen.hpp"
#include "snell/snell.hpp"
#include "snell/step_path.hpp"
#include "snell/stopping.hpp"

namespace py = pybind11;
using namespace snell;

namespace {

Payoff payoff_from_arg(const py::object& payoff) {
    if (py::isinstance<py::str>(payoff)) return make_payoff(payoff.cast<std::string>());
    if (py::isinstance<Payoff>(payoff)) return payoff.cast<Payoff>();
    throw std::invalid_argument("payoff must be a name or a Payoff");
}

py::dict report_to_dict(const ValueReport& report) {
    py::dict d;
    d["value"] = report.value;
    d["observable"] = report.observable;
    d["payoff"] = report.payoff;
    d["L"] = report.bound_L;
    d["tree_id"] = report.tree_id;
    d["unbounded_payoff"] = report.unbounded_payoff;
    d["wall_ms"] = report.wall_ms;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optimal stopping values on finite filtered scenario spaces";
    m.attr("__version__") = kVersion;

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<std::vector<double>>(), py::arg("points"))
        .def_property_readonly("points", &TimeGrid::points)
        .def_property_readonly("mesh", &TimeGrid::mesh)
        .def("__len__", &TimeGrid::size);

    py::class_<StepPath>(m, "StepPath")
        .def(py::init<std::vector<double>, std::vector<double>, double>(),
             py::arg("jump_times"), py::arg("values"), py::arg("horizon"))
        .def_property_readonly("jump_times", &StepPath::jump_times)
        .def_property_readonly("values", &StepPath::values)
        .def_property_readonly("horizon", &StepPath::horizon)
        .def("eval", &StepPath::eval, py::arg("t"))
        .def("__call__", &StepPath::eval, py::arg("t"))
        .def("__eq__", [](const StepPath& a, const StepPath& b) { return a == b; });

    m.def("uniform_distance", &uniform_distance, py::arg("a"), py::arg("b"));
    m.def("skorokhod_distance", &skorokhod_distance, py::arg("a"), py::arg("b"));

    py::class_<CoupledSpace>(m, "CoupledSpace")
        .def_property_readonly("depth", &CoupledSpace::depth)
        .def_property_readonly("times",
                               [](const CoupledSpace& s) { return s.tree().times().points(); })
        .def_property_readonly("leaf_count",
                               [](const CoupledSpace& s) { return s.tree().leaf_count(); })
        .def_property_readonly("observables", &CoupledSpace::observable_names)
        .def_property_readonly("leaf_weights",
                               [](const CoupledSpace& s) {
                                   std::vector<double> w;
                                   for (int li = 0; li < s.tree().leaf_count(); ++li)
                                       w.push_back(s.tree().leaf_weight(li));
                                   return w;
                               })
        .def("value_at", &CoupledSpace::value_at, py::arg("observable"), py::arg("leaf"),
             py::arg("time_index"))
        .def("with_observable", &CoupledSpace::with_observable, py::arg("name"),
             py::arg("node_values"))
        .def("atom_partition",
             [](const CoupledSpace& s, const std::string& obs, int k) {
                 return atom_partition(s, obs, k).atoms;
             },
             py::arg("observable"), py::arg("time_index"))
        .def("cond_expectation",
             [](const CoupledSpace& s, const std::vector<double>& f, const std::string& obs,
                int k) { return cond_expectation(s, f, obs, k); },
             py::arg("f"), py::arg("observable"), py::arg("time_index"))
        .def("expectation",
             [](const CoupledSpace& s, const std::vector<double>& f) {
                 return expectation(s, f);
             },
             py::arg("f"))
        .def("leaf_path",
             [](const CoupledSpace& s, int leaf, const std::string& obs) {
                 return leaf_scenarios(s).at(static_cast<std::size_t>(leaf)).paths.at(obs);
             },
             py::arg("leaf"), py::arg("observable"))
        .def("to_json", [](const CoupledSpace& s) { return space_to_json(s).dump(); });

    m.def("space_from_json",
          [](const std::string& text) { return space_from_json(nlohmann::json::parse(text)); },
          py::arg("text"));

    py::class_<CrrParams>(m, "CrrParams")
        .def(py::init([](double s0, double lambda, double sigma, double horizon, int steps) {
                 CrrParams p;
                 p.s0 = s0;
                 p.lambda = lambda;
                 p.sigma = sigma;
                 p.horizon = horizon;
                 p.steps = steps;
                 p.validate();
                 return p;
             }),
             py::arg("s0"), py::arg("lambda_"), py::arg("sigma"), py::arg("horizon"),
             py::arg("steps"))
        .def_readonly("s0", &CrrParams::s0)
        .def_readonly("lambda_", &CrrParams::lambda)
        .def_readonly("sigma", &CrrParams::sigma)
        .def_readonly("horizon", &CrrParams::horizon)
        .def_readonly("steps", &CrrParams::steps);

    m.def("gen_crr", &gen_crr, py::arg("params"));
    m.def("gen_random_walk", &gen_random_walk, py::arg("steps"), py::arg("horizon"));
    m.def("walk_increment", &walk_increment, py::arg("steps"), py::arg("horizon"));
    m.def("discretize_process", &discretize_process, py::arg("space"), py::arg("source"),
          py::arg("grid"), py::arg("name"));
    m.def("gen_counterexample", &gen_counterexample, py::arg("n"));
    m.def("space_from_path", &space_from_path, py::arg("path"), py::arg("grid"), py::arg("name"));

    py::class_<Payoff>(m, "Payoff")
        .def(py::init([](const std::string& name, std::function<double(double, double)> gamma,
                         double bound) {
                 return Payoff(name, std::move(gamma), bound, "user payoff");
             }),
             py::arg("name"), py::arg("gamma"), py::arg("bound"))
        .def_property_readonly("name", &Payoff::name)
        .def_property_readonly("bound", &Payoff::bound)
        .def("__call__", &Payoff::operator(), py::arg("t"), py::arg("x"));
    m.def("make_payoff", &make_payoff, py::arg("name"));

    py::class_<StoppingRule>(m, "StoppingRule")
        .def_readonly("observable", &StoppingRule::observable)
        .def_readonly("bound", &StoppingRule::bound)
        .def("to_json", [](const StoppingRule& r) { return rule_to_json(r).dump(); });
    py::class_<RandomizedStoppingRule>(m, "RandomizedStoppingRule")
        .def(py::init([](std::string observable, double bound,
                         std::vector<std::vector<double>> stop_prob) {
                 RandomizedStoppingRule r;
                 r.observable = std::move(observable);
                 r.bound = bound;
                 r.stop_prob = std::move(stop_prob);
                 return r;
             }),
             py::arg("observable"), py::arg("bound"), py::arg("stop_prob"))
        .def_readonly("observable", &RandomizedStoppingRule::observable)
        .def_readonly("bound", &RandomizedStoppingRule::bound)
        .def("to_json", [](const RandomizedStoppingRule& r) { return rule_to_json(r).dump(); });

    m.def("rule_from_json",
          [](const std::string& text) { return rule_from_json(nlohmann::json::parse(text)); });
    m.def("realized_times", [](const CoupledSpace& space, const StoppingRule& rule) {
        std::vector<double> out;
        for (int idx : realized_indices(space, rule))
            out.push_back(space.tree().times()[static_cast<std::size_t>(idx)]);
        return out;
    });
    m.def("stop_at_root", &stop_at_root, py::arg("space"), py::arg("observable"), py::arg("bound"));
    m.def("never_stop_early", &never_stop_early, py::arg("space"), py::arg("observable"),
          py::arg("bound"));
    m.def("lemma_tn", &lemma_tn, py::arg("space"), py::arg("tau"), py::arg("target"));
    m.def("grid_round_up", &grid_round_up, py::arg("space"), py::arg("tau"), py::arg("grid"));
    m.def("sample_randomized", &sample_randomized, py::arg("space"), py::arg("rule"),
          py::arg("v"));
    m.def("randomized_from_pure", &randomized_from_pure, py::arg("space"), py::arg("rule"));

    m.def("stopped_value",
          [](const CoupledSpace& space, const std::string& obs, const py::object& payoff,
             const StoppingRule& rule) {
              return stopped_value(space, obs, payoff_from_arg(payoff), rule);
          },
          py::arg("space"), py::arg("observable"), py::arg("payoff"), py::arg("rule"));
    m.def("snell_value",
          [](const CoupledSpace& space, const std::string& obs, const py::object& payoff,
             double L) {
              const ValueReport report = snell_value(space, obs, payoff_from_arg(payoff), L);
              py::dict d = report_to_dict(report);
              d["rule"] = *report.rule;
              return d;
          },
          py::arg("space"), py::arg("observable"), py::arg("payoff"), py::arg("L"));
    m.def("gamma_pi",
          [](const CoupledSpace& space, const std::string& obs, const py::object& payoff,
             const TimeGrid& pi, double L) {
              const ValueReport report = gamma_pi(space, obs, payoff_from_arg(payoff), pi, L);
              py::dict d = report_to_dict(report);
              d["rule"] = *report.rule;
              d["restriction"] = report.restriction->points();
              return d;
          },
          py::arg("space"), py::arg("observable"), py::arg("payoff"), py::arg("pi"), py::arg("L"));
    m.def("randomized_value",
          [](const CoupledSpace& space, const std::string& obs, const py::object& payoff,
             const RandomizedStoppingRule& rule) {
              return randomized_value(space, obs, payoff_from_arg(payoff), rule);
          },
          py::arg("space"), py::arg("observable"), py::arg("payoff"), py::arg("rule"));
    m.def("aldous_sup", &aldous_sup, py::arg("space"), py::arg("observable"), py::arg("delta"),
          py::arg("eps"), py::arg("L"));
    m.def("crr_snell_value",
          [](const CrrParams& params, const py::object& payoff, double L) {
              return report_to_dict(crr_snell_value(params, payoff_from_arg(payoff), L));
          },
          py::arg("params"), py::arg("payoff"), py::arg("L"));

    m.def("paths_in_prob_gap", &paths_in_prob_gap, py::arg("space"), py::arg("fine"),
          py::arg("coarse"), py::arg("eps"));
    m.def("sigma_field_gap", &sigma_field_gap, py::arg("space"), py::arg("A"),
          py::arg("observable"), py::arg("time_index"), py::arg("eps"));
    m.def("filtration_weak_gap", &filtration_weak_gap, py::arg("space"), py::arg("A"),
          py::arg("coarse"), py::arg("fine"), py::arg("eps"));

    m.def("run_experiment",
          [](const py::object& config) {
              ExperimentConfig cfg;
              if (py::isinstance<py::str>(config)) {
                  const std::string text = config.cast<std::string>();
                  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
                  if (j.is_discarded()) cfg = default_config(text);
                  else cfg = config_from_json(j);
              } else {
                  cfg = config_from_json(
                      nlohmann::json::parse(py::module_::import("json")
                                                .attr("dumps")(config)
                                                .cast<std::string>()));
              }
              const ExperimentReport report = run_experiment(cfg);
              py::dict d;
              d["experiment"] = report.experiment;
              d["passed"] = report.passed();
              d["columns"] = report.columns;
              d["rows"] = report.rows;
              d["csv"] = report.csv();
              py::list asserts;
              for (const Assertion& a : report.assertions) {
                  py::dict ad;
                  ad["name"] = a.name;
                  ad["pass"] = a.pass;
                  ad["detail"] = a.detail;
                  asserts.append(ad);
              }
              d["assertions"] = asserts;
              return d;
          },
          py::arg("config"),
          "Run an experiment from a name, a JSON string, or a config dict");
    m.def("default_config_json",
          [](const std::string& name) { return config_to_json(default_config(name)).dump(); },
          py::arg("name"));
}
