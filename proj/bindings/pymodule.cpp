// Python surface of the toolkit. The scenario engine is exposed whole (it is
// the same code path the CLI drives), plus a handful of direct numerical
// entry points that are convenient to call from scripts.

#include "collide/collision.hpp"
#include "collide/linalg.hpp"
#include "collide/nonmarkov.hpp"
#include "collide/scenario.hpp"
#include "collide/states.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace collide;

namespace {

std::vector<std::string> validate_config(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.violations;
  }
  return {};
}

py::dict run_scenario_py(const std::string& config_text, const std::string& out_dir,
                         std::optional<std::uint64_t> seed,
                         std::optional<int> n_traj) {
  ScenarioConfig cfg = parse_config(config_text);
  if (seed) cfg.seed = *seed;  // an explicit seed wins over the config
  if (n_traj) {
    if (scenario_family(cfg.scenario) != "trajectories")
      throw ConfigError("n_traj only applies to trajectory scenarios",
                        {"n_traj only applies to trajectory scenarios"});
    cfg.model["n_traj"] = double(*n_traj);
  }

  const ScenarioOutcome outcome = run_scenario(cfg, out_dir);
  py::dict result;
  result["csv_files"] = outcome.csv_files;
  result["manifest_file"] = outcome.manifest_file;
  result["check_passed"] = outcome.check_passed;
  result["check_detail"] = outcome.check_detail;
  return result;
}

std::vector<ComplexMatrix> run_collision_chain(const ComplexMatrix& H_S,
                                               const ComplexMatrix& H_anc,
                                               const ComplexMatrix& V,
                                               const ComplexMatrix& eta,
                                               const ComplexMatrix& rho0, double dt,
                                               int n_steps) {
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  const TensorSpace sys({"S"}, {rho0.rows()});
  const TensorSpace anc({"anc"}, {eta.rows()});
  const ComplexMatrix U = build_unitary(H_S, H_anc, V, dt);
  const DensityMatrix fresh = DensityMatrix::create(eta, anc);

  DensityMatrix rho = DensityMatrix::create(rho0, sys);
  std::vector<ComplexMatrix> out;
  out.reserve(std::size_t(n_steps) + 1);
  out.push_back(rho.matrix);
  for (int n = 0; n < n_steps; ++n) {
    rho = collide::collide(rho, fresh, U).rho;
    out.push_back(rho.matrix);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_collide, m) {
  m.doc() = "Collision-model simulation toolkit";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("version", [] { return std::string(kToolkitVersion); },
        "Toolkit version string.");

  m.def("bundled_scenarios", &bundled_scenarios,
        "Names of the scenarios shipped with the toolkit.");
  m.def("bundled_config", &bundled_config_text, py::arg("name"),
        "Complete config text for a bundled scenario.");
  m.def("scenario_family", &scenario_family, py::arg("name"),
        "Which CLI subcommand a scenario belongs to.");
  m.def("validate_config", &validate_config, py::arg("config_text"),
        "All violations found in a config, field by field; empty means valid.");
  m.def("run_scenario", &run_scenario_py, py::arg("config_text"),
        py::arg("out_dir") = ".", py::arg("seed") = py::none(),
        py::arg("n_traj") = py::none(),
        "Run one scenario: writes its CSV and manifest into out_dir and "
        "returns the file list plus the self-check result. An explicit seed "
        "overrides the config.");

  m.def("run_collision_chain", &run_collision_chain, py::arg("H_S"),
        py::arg("H_anc"), py::arg("V"), py::arg("eta"), py::arg("rho0"),
        py::arg("dt"), py::arg("n_steps"),
        "Repeated collisions with identically prepared ancillas: returns the "
        "system state after 0..n_steps collisions as dense matrices.");

  m.def(
      "composite_recurrence",
      [](double G, double g, double dt, int n_max) {
        const CompositeAmplitudes amp = composite_recurrence({G, g, dt}, n_max);
        return py::make_tuple(amp.alpha, amp.beta);
      },
      py::arg("G"), py::arg("g"), py::arg("dt"), py::arg("n_max"),
      "Single-excitation amplitudes (system, memory) of the two-stage "
      "memory chain after each collision.");

  m.def(
      "delayed_emission",
      [](double gamma, double dt, int d, double phi, int n_max) {
        return delayed_emission({gamma, dt, d, phi}, n_max);
      },
      py::arg("gamma"), py::arg("dt"), py::arg("d"), py::arg("phi"),
      py::arg("n_max"),
      "Excited-state amplitude of an emitter whose output returns after d "
      "collisions with phase phi.");

  m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"),
        "Trace distance between two Hermitian matrices.");
}
