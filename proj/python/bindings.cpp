#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixbo/mixbo.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Python objects cross the boundary as JSON text so that every input goes
// through the same validation as config files.
json to_json(const py::handle& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object from_json(const json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

mixbo::SearchSpace space_from(const py::handle& obj) { return mixbo::SearchSpace::from_json(to_json(obj)); }

py::object assignment(const mixbo::ParamAssignment& a) { return from_json(mixbo::assignment_to_json(a)); }

py::list assignments(const std::vector<mixbo::ParamAssignment>& v) {
  py::list out;
  for (const auto& a : v) out.append(assignment(a));
  return out;
}

}  // namespace

PYBIND11_MODULE(_mixbo, m) {
  m.doc() = "Batch Bayesian optimization over mixed-type search spaces";

  py::register_exception<mixbo::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<mixbo::ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<mixbo::BudgetExhausted>(m, "BudgetExhausted", PyExc_RuntimeError);

  py::class_<mixbo::SearchSpace>(m, "SearchSpace")
      .def(py::init([](const py::dict& doc) { return space_from(doc); }), py::arg("spec"),
           "Build from {\"params\": [...]} using the config-file schema.")
      .def_property_readonly("warped_dim", &mixbo::SearchSpace::warped_dim)
      .def_property_readonly("warped_lower", &mixbo::SearchSpace::warped_lower)
      .def_property_readonly("warped_upper", &mixbo::SearchSpace::warped_upper)
      .def("__len__", &mixbo::SearchSpace::size)
      .def("to_dict", [](const mixbo::SearchSpace& s) { return from_json(s.to_json()); })
      .def("validate", [](const mixbo::SearchSpace& s, const py::dict& a) {
        s.validate(mixbo::assignment_from_json(s, to_json(a)));
      })
      .def("warp", [](const mixbo::SearchSpace& s, const py::dict& a) {
        return s.warp(mixbo::assignment_from_json(s, to_json(a)));
      })
      .def("unwarp", [](const mixbo::SearchSpace& s, const Eigen::VectorXd& x) { return assignment(s.unwarp(x)); })
      .def("coerce", &mixbo::SearchSpace::coerce)
      .def("clip", &mixbo::SearchSpace::clip);

  m.def("expected_improvement",
        [](double f_min, double mean, double std) { return mixbo::expected_improvement(f_min, mean, std); },
        py::arg("f_min"), py::arg("mean"), py::arg("std"));

  m.def("random_init",
        [](const mixbo::SearchSpace& s, std::size_t n_batches, std::size_t batch_size, std::uint64_t seed) {
          return assignments(mixbo::random_init(s, n_batches, batch_size, seed));
        },
        py::arg("space"), py::arg("n_batches"), py::arg("batch_size"), py::arg("seed") = 0);
  m.def("latin_hypercube_init",
        [](const mixbo::SearchSpace& s, std::size_t n_batches, std::size_t batch_size, std::uint64_t seed) {
          return assignments(mixbo::latin_hypercube_init(s, n_batches, batch_size, seed));
        },
        py::arg("space"), py::arg("n_batches"), py::arg("batch_size"), py::arg("seed") = 0);

  py::class_<mixbo::Optimizer>(m, "Optimizer")
      .def(py::init([](const py::dict& config) { return mixbo::Optimizer(mixbo::RunConfig::from_json(to_json(config))); }),
           py::arg("config"), "Run config dict; must include \"space\".")
      .def("suggest", [](mixbo::Optimizer& o) { return assignments(o.suggest()); })
      .def("observe", [](mixbo::Optimizer& o, const std::vector<double>& values) { o.observe(values); },
           py::arg("values"))
      .def("best", [](const mixbo::Optimizer& o) {
        const auto [a, v] = o.best();
        return py::make_tuple(assignment(a), v);
      })
      .def_property_readonly("finished", &mixbo::Optimizer::finished)
      .def_property_readonly("pending", &mixbo::Optimizer::pending)
      .def_property_readonly("batch_index", &mixbo::Optimizer::batch_index)
      .def_property_readonly("config", [](const mixbo::Optimizer& o) { return from_json(o.config().to_json()); })
      .def("history", [](const mixbo::Optimizer& o) {
        py::list out;
        for (const auto& t : o.trials()) {
          py::dict row;
          row["assignment"] = assignment(t.assignment);
          row["value"] = t.value ? py::cast(*t.value) : py::none();
          row["batch"] = t.batch_index;
          out.append(row);
        }
        return out;
      });

  m.def("problems", [] {
    std::vector<std::string> names;
    for (const auto& p : mixbo::bench::builtin_problems()) names.push_back(p.name);
    return names;
  });
  m.def("problem_space", [](const std::string& name) { return mixbo::bench::find_problem(name).space; },
        py::arg("name"));
  m.def("evaluate",
        [](const std::string& name, const py::dict& a) {
          const auto& p = mixbo::bench::find_problem(name);
          const auto parsed = mixbo::assignment_from_json(p.space, to_json(a));
          p.space.validate(parsed);
          return p.evaluate(parsed);
        },
        py::arg("problem"), py::arg("assignment"));
  m.def("run_problem",
        [](const py::dict& config, const std::string& name, std::uint64_t seed) {
          const auto cfg = mixbo::RunConfig::from_json(to_json(config));
          mixbo::bench::RunReport report;
          {
            py::gil_scoped_release release;
            report = mixbo::bench::run_problem(cfg, mixbo::bench::find_problem(name), seed);
          }
          return from_json(report.to_json());
        },
        py::arg("config"), py::arg("problem"), py::arg("seed") = 0,
        "Run the batch protocol on a builtin problem; returns the run report.");
  m.def("score", py::overload_cast<double, double, double>(&mixbo::bench::score), py::arg("best_found"),
        py::arg("random_baseline"), py::arg("known_optimum"));
}
