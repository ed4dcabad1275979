#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uscqed/scenario.hpp"

namespace py = pybind11;
using namespace uscqed;

namespace {

ScenarioConfig load(const std::string& config_or_id) {
  return is_canonical(config_or_id) ? canonical_scenario(config_or_id) : validate_config(config_or_id);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the scenario layer; configs travel as JSON text.";

  auto& config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", config_error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ModeTypeError& e) {
      PyErr_SetString(PyExc_TypeError, e.what());
    } catch (const BracketError& e) {
      PyErr_SetString(py::module_::import("uscqed._core").attr("ConvergenceError").ptr(), e.what());
    } catch (const StepSizeError& e) {
      PyErr_SetString(py::module_::import("uscqed._core").attr("ConvergenceError").ptr(), e.what());
    }
  });

  m.def("version", &version);

  m.def("list_scenarios", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& e : list_scenarios()) out.emplace_back(e.id, e.figure, e.description);
    return out;
  });

  m.def("canonical_config", [](const std::string& id) { return config_to_json(canonical_scenario(id)); },
        py::arg("scenario_id"));

  m.def("validate", [](const std::string& text) { return config_to_json(validate_config(text)); }, py::arg("config"),
        "Resolved config with defaults filled in.");

  m.def(
      "compute",
      [](const std::string& config_or_id, std::optional<int> n_max) {
        RunOptions options;
        options.n_max = n_max;
        ScenarioResult r;
        {
          py::gil_scoped_release release;
          r = compute_scenario(apply_overrides(load(config_or_id), options));
        }
        return py::make_tuple(r.table.columns, r.table.data, format_metadata(r.metadata, false));
      },
      py::arg("config"), py::arg("n_max") = py::none(),
      "(columns, data[column][row], metadata JSON) without touching the file system.");

  m.def(
      "run",
      [](const std::string& config_or_id, const std::string& out_dir, const std::string& format,
         std::optional<int> n_max, bool deterministic) {
        RunOptions options;
        options.out_dir = out_dir;
        options.format = parse_output_format(format);
        options.n_max = n_max;
        options.deterministic = deterministic;
        py::gil_scoped_release release;
        const auto out = run_scenario(load(config_or_id), options);
        return std::make_pair(out.data_path, out.metadata_path);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("format") = "csv", py::arg("n_max") = py::none(),
      py::arg("deterministic") = false);
}
