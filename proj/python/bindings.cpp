#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "ephs/dsl.hpp"
#include "ephs/error.hpp"
#include "ephs/expr.hpp"
#include "ephs/flatten.hpp"
#include "ephs/render.hpp"
#include "ephs/simulate.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_array(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  py::array_t<double> out({rows.size(), cols});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) view(i, j) = rows[i][j];
  }
  return out;
}

ephs::FlatSystem flatten_system(const ephs::Model& m, const std::string& system) {
  ephs::ResolvedSystem rs = m.system(system);
  return ephs::flatten(*rs.component, rs.bindings);
}

struct PyTrajectory {
  ephs::Trajectory traj;
  ephs::SimConfig cfg;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the ephs model compiler.";

  static py::exception<ephs::Error> error(m, "EphsError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ephs::Error& e) {
      py::object type = error;
      py::object exc = type(py::str(e.diagnostic()));
      exc.attr("kind") = py::str(std::string(ephs::to_string(e.kind())));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<ephs::Model>(m, "Model")
      .def_property_readonly("systems", [](const ephs::Model& self) { return self.declaration_order; })
      .def_property_readonly("diagrams",
                             [](const ephs::Model& self) {
                               std::vector<std::string> names;
                               for (const auto& [name, d] : self.diagrams) names.push_back(name);
                               return names;
                             })
      .def("render", [](const ephs::Model& self, const std::string& system) {
        auto c = self.system(system).component;
        const auto& composite = std::get<ephs::CompositeComponent>(c->body);
        return ephs::to_dot(composite.diagram, ephs::filler_kinds(*c), system);
      }, py::arg("system"), "Graphviz DOT text of a system's diagram.")
      .def("compose", [](const ephs::Model& self, const std::string& system) {
        return ephs::print_model(ephs::compose(self, system));
      }, py::arg("system"), "Single-level .ephs text for a system.");

  m.def("load", [](const std::string& path) { return ephs::load_model_file(path); }, py::arg("path"), "Read, parse and resolve a model file.");
  m.def("parse", [](const std::string& text, const std::string& file) {
    return ephs::resolve(ephs::parse_model(text, file));
  }, py::arg("text"), py::arg("file") = "<input>");

  py::class_<ephs::FlatSystem>(m, "FlatSystem")
      .def_readonly("states", &ephs::FlatSystem::states)
      .def_readonly("initial", &ephs::FlatSystem::initial)
      .def_property_readonly("parameters",
                             [](const ephs::FlatSystem& self) {
                               return std::map<std::string, double>(self.parameters.begin(), self.parameters.end());
                             })
      .def_property_readonly("monitors",
                             [](const ephs::FlatSystem& self) {
                               std::vector<std::string> names;
                               for (const auto& mon : self.monitors) names.push_back(mon.name);
                               return names;
                             })
      .def("set_parameter", &ephs::FlatSystem::set_parameter, py::arg("name"), py::arg("value"))
      .def("equations", &ephs::equation_listing)
      .def("csv_header", &ephs::csv_header)
      .def("rhs", [](const ephs::FlatSystem& self, const std::vector<double>& state, double t) {
        auto r = ephs::rhs(self, state, t);
        return py::make_tuple(r.derivative, r.monitors);
      }, py::arg("state"), py::arg("t") = 0.0, "Derivatives and monitor values at one state.");

  m.def("flatten", &flatten_system, py::arg("model"), py::arg("system"));

  py::class_<PyTrajectory>(m, "Trajectory")
      .def_property_readonly("times", [](const PyTrajectory& self) {
        return py::array_t<double>(self.traj.times.size(), self.traj.times.data());
      })
      .def_property_readonly("states", [](const PyTrajectory& self) {
        return to_array(self.traj.states, self.traj.state_names.size());
      })
      .def_property_readonly("monitors", [](const PyTrajectory& self) {
        return to_array(self.traj.monitors, self.traj.monitor_names.size());
      })
      .def_property_readonly("state_names", [](const PyTrajectory& self) { return self.traj.state_names; })
      .def_property_readonly("monitor_names", [](const PyTrajectory& self) { return self.traj.monitor_names; })
      .def("report", [](const PyTrajectory& self, bool closed) {
        auto r = ephs::monitor_report(self.traj, self.cfg, closed);
        return py::make_tuple(r.ok(), r.str());
      }, py::arg("closed") = true, "(ok, text) of the invariant checks.");

  m.def("simulate", [](const ephs::FlatSystem& sys, double t_end, double dt) {
    PyTrajectory out;
    out.cfg.t_end = t_end;
    out.cfg.dt = dt;
    py::gil_scoped_release release;
    out.traj = ephs::integrate_rk4(sys, out.cfg);
    return out;
  }, py::arg("system"), py::arg("t_end"), py::arg("dt") = 1e-3, "Fixed-step RK4 from the initial state.");

  m.def("differentiate", [](const std::string& expr, const std::string& var) {
    return ephs::to_string(ephs::simplify(ephs::differentiate(ephs::parse_expr(expr), var)));
  }, py::arg("expr"), py::arg("var"));
  m.def("evaluate", [](const std::string& expr, const std::map<std::string, double>& env) {
    return ephs::eval(ephs::parse_expr(expr), ephs::Env(env.begin(), env.end()));
  }, py::arg("expr"), py::arg("env") = std::map<std::string, double>{});
}
