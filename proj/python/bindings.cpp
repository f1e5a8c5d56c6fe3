#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "solitonscope/experiment.hpp"
#include "solitonscope/soliton_profile.hpp"

namespace py = pybind11;
using namespace solitonscope;

namespace {

RadialGrid make_grid(int dimension, double extent, std::size_t num_points) {
  if (dimension == 1) return RadialGrid::line(extent, num_points);
  if (dimension == 3) return RadialGrid::radial(extent, num_points);
  throw InvalidArgument("dimension must be 1 or 3");
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict check_dict(const Check& c) {
  py::dict d;
  d["name"] = c.name;
  d["value"] = c.value;
  d["threshold"] = c.threshold;
  d["relation"] = c.relation;
  d["passed"] = c.passed;
  d["skipped"] = c.skipped;
  return d;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Focusing NLS experiments: evolution, hydrodynamic diagnostics, soliton profiles.";

  const auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());

  py::class_<ExperimentConfig>(m, "Config")
      .def_static(
          "default", [](const std::string& scenario) { return default_config(parse_scenario(scenario)); },
          py::arg("scenario"))
      .def_static("from_ini", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("to_ini", &to_ini)
      .def("validate", [](const ExperimentConfig& c) { validate(c, false); })
      .def_property_readonly("scenario", [](const ExperimentConfig& c) { return std::string(scenario_name(c.scenario)); })
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_property(
          "stage_until", [](const ExperimentConfig& c) { return std::string(stage_name(c.stage_until)); },
          [](ExperimentConfig& c, const std::string& s) { c.stage_until = parse_stage(s); })
      .def_readwrite("dimension", &ExperimentConfig::dimension)
      .def_readwrite("extent", &ExperimentConfig::extent)
      .def_readwrite("num_points", &ExperimentConfig::num_points)
      .def_property(
          "dt", [](const ExperimentConfig& c) { return c.solver.dt; },
          [](ExperimentConfig& c, double v) { c.solver.dt = v; })
      .def_property(
          "t_final", [](const ExperimentConfig& c) { return c.solver.t_final; },
          [](ExperimentConfig& c, double v) { c.solver.t_final = v; })
      .def_property(
          "output_stride", [](const ExperimentConfig& c) { return c.solver.output_stride; },
          [](ExperimentConfig& c, int v) { c.solver.output_stride = v; })
      .def_readwrite("radii", &ExperimentConfig::radii)
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; })
      .def("__repr__", [](const ExperimentConfig& c) {
        return "<Config " + c.name + " (" + std::string(scenario_name(c.scenario)) + ")>";
      });

  py::class_<RunReport>(m, "Report")
      .def_property_readonly("passed", &RunReport::passed)
      .def_readonly("complete", &RunReport::complete)
      .def_readonly("failed_stage", &RunReport::failed_stage)
      .def_readonly("error", &RunReport::error)
      .def_readonly("warnings", &RunReport::warnings)
      .def_readonly("config", &RunReport::config)
      .def_property_readonly("checks",
                             [](const RunReport& r) {
                               py::list out;
                               for (const auto& c : r.checks) out.append(check_dict(c));
                               return out;
                             })
      .def_property_readonly("summary", [](const RunReport& r) { return to_python(r.summary); })
      .def("to_json", [](const RunReport& r) { return r.to_json().dump(2); });

  m.def(
      "run",
      [](const ExperimentConfig& c) {
        py::gil_scoped_release release;
        return run(c);
      },
      py::arg("config"), "Runs the pipeline and writes artifacts to config.output_dir.");
  m.def("report_from_dir", &report_from_dir, py::arg("run_dir"),
        "Recomputes the report of a finished run from its artifacts.");

  m.def(
      "read_csv",
      [](const std::filesystem::path& path) {
        const auto t = read_csv(path);
        py::dict out;
        for (const auto& name : t.columns) out[py::str(name)] = to_array(t.values(name));
        return out;
      },
      py::arg("path"), "Columns of an artifact CSV as numpy arrays.");

  m.def(
      "grid_nodes",
      [](int dimension, double extent, std::size_t num_points) {
        return to_array(make_grid(dimension, extent, num_points).nodes());
      },
      py::arg("dimension"), py::arg("extent"), py::arg("num_points"));

  m.def(
      "soliton_profile",
      [](double energy, int dimension, double extent, std::size_t num_points, double power, double coefficient) {
        const auto p = solve_profile(energy, NonlinearitySpec::make(power, coefficient),
                                     make_grid(dimension, extent, num_points));
        return py::make_tuple(to_array(p.grid.nodes()), to_array(p.u));
      },
      py::arg("energy"), py::arg("dimension"), py::arg("extent"), py::arg("num_points"), py::arg("power") = 2.0,
      py::arg("coefficient") = -1.0, "Ground state (nodes, u) of the profile equation.");

  m.def(
      "evolve",
      [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> psi0, int dimension,
         double extent, double dt, double t_final, int output_stride, double power, double coefficient) {
        const auto grid = make_grid(dimension, extent, static_cast<std::size_t>(psi0.size()));
        WaveField f(grid, std::vector<cplx>(psi0.data(), psi0.data() + psi0.size()));
        SolverConfig cfg;
        cfg.method = default_method(grid);
        cfg.dt = dt;
        cfg.t_final = t_final;
        cfg.output_stride = output_stride;
        Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = evolve(f, NonlinearitySpec::make(power, coefficient), cfg);
        }
        const auto rows = static_cast<py::ssize_t>(traj.snapshots.size());
        const auto cols = static_cast<py::ssize_t>(grid.size());
        py::array_t<std::complex<double>> fields({rows, cols});
        auto out = fields.mutable_unchecked<2>();
        std::vector<double> times, mass, energy;
        for (py::ssize_t s = 0; s < rows; ++s) {
          const auto& snap = traj.snapshots[static_cast<std::size_t>(s)];
          for (py::ssize_t k = 0; k < cols; ++k) out(s, k) = snap.values[static_cast<std::size_t>(k)];
          times.push_back(snap.time);
          mass.push_back(traj.conserved[static_cast<std::size_t>(s)].mass);
          energy.push_back(traj.conserved[static_cast<std::size_t>(s)].energy);
        }
        py::dict result;
        result["t"] = to_array(times);
        result["psi"] = fields;
        result["mass"] = to_array(mass);
        result["energy"] = to_array(energy);
        return result;
      },
      py::arg("psi0"), py::arg("dimension"), py::arg("extent"), py::arg("dt"), py::arg("t_final"),
      py::arg("output_stride") = 1, py::arg("power") = 2.0, py::arg("coefficient") = -1.0,
      "Evolves samples psi0 on the grid of the given dimension and extent. Returns t, psi, mass, energy.");
}
