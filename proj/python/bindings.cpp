#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "gfpk/chaos_basis.hpp"
#include "gfpk/config.hpp"
#include "gfpk/density.hpp"
#include "gfpk/diagnostics.hpp"
#include "gfpk/error.hpp"
#include "gfpk/runner.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Dicts cross the boundary as JSON text; the Python wrapper does the (de)serialization.
py::tuple run_json(const std::string& config, const std::string& output_dir) {
  gfpk::RunConfig cfg = gfpk::parse_config(json::parse(config));
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  gfpk::RunReport out;
  {
    py::gil_scoped_release release;
    out = gfpk::run(cfg);
  }
  return py::make_tuple(out.exit_code, out.report.dump(), out.artifacts);
}

}  // namespace

PYBIND11_MODULE(_gfpk, m) {
  m.doc() = "Wiener chaos Galerkin solver for stationary Fokker-Planck equations";
  m.attr("__version__") = GFPK_VERSION;

  auto base = py::register_exception<gfpk::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<gfpk::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<gfpk::SolverError>(m, "SolverError", base.ptr());
  py::register_exception<gfpk::SizeError>(m, "SizeError", base.ptr());
  py::register_exception<gfpk::ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<gfpk::NumericError>(m, "NumericError", base.ptr());

  m.def(
      "enumerate_basis",
      [](int k, int N) {
        const auto basis = gfpk::enumerate_basis(k, N);
        std::vector<std::vector<int>> out;
        for (const auto& a : basis->indices()) out.push_back(a.exponents);
        return out;
      },
      py::arg("k"), py::arg("N"), "Multi-indices of total degree <= N in graded lexicographic order.");
  m.def("basis_size", &gfpk::basis_size, py::arg("k"), py::arg("N"));
  m.def("hermite", &gfpk::hermite_eval, py::arg("n"), py::arg("x"), "Normalized probabilists' Hermite polynomial.");

  py::class_<gfpk::ChaosDensity>(m, "ChaosDensity")
      .def(py::init([](int k, int N, const Eigen::VectorXd& c) {
             return gfpk::ChaosDensity(gfpk::enumerate_basis(k, N), c);
           }),
           py::arg("k"), py::arg("N"), py::arg("coefficients"))
      .def_static(
          "constant", [](int k, int N) { return gfpk::ChaosDensity::constant(gfpk::enumerate_basis(k, N)); },
          py::arg("k"), py::arg("N"))
      .def_static(
          "cameron_martin",
          [](int N, const std::vector<double>& shift) {
            const int k = static_cast<int>(shift.size());
            return gfpk::ChaosDensity::cameron_martin(gfpk::enumerate_basis(k, N), shift);
          },
          py::arg("N"), py::arg("shift"))
      .def_static(
          "from_json", [](const std::string& text) { return gfpk::density_from_json(json::parse(text)); },
          py::arg("text"))
      .def_property_readonly("dimension", &gfpk::ChaosDensity::dimension)
      .def_property_readonly("degree", [](const gfpk::ChaosDensity& r) { return r.chaos_basis().max_degree(); })
      .def_property_readonly("coefficients", &gfpk::ChaosDensity::coefficients)
      .def("l2_norm_squared", &gfpk::ChaosDensity::l2_norm_squared)
      .def(
          "__call__", [](const gfpk::ChaosDensity& r, const std::vector<double>& x) { return r.evaluate(x); },
          py::arg("x"))
      .def("evaluate_all", &gfpk::ChaosDensity::evaluate_all, py::arg("points"),
           "Values at the columns of a (k, n) array.")
      .def("to_json", [](const gfpk::ChaosDensity& r) { return gfpk::dump_density(r); });

  m.def("l2_distance", &gfpk::l2_distance, py::arg("a"), py::arg("b"));
  m.def("b1_bound", &gfpk::b1_bound, py::arg("c0"));
  m.def("sigma_infinity", &gfpk::sigma_infinity, py::arg("h_bound"));
  m.def("config_hash", [](const std::string& text) { return gfpk::config_hash(json::parse(text)); });
  m.def("_run", &run_json, py::arg("config"), py::arg("output_dir") = "");
}
