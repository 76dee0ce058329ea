#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hcfloop/constellation.hpp"
#include "hcfloop/experiment.hpp"
#include "hcfloop/fiber.hpp"
#include "hcfloop/metrics.hpp"

namespace py = pybind11;
using namespace hcfloop;

namespace {

py::dict result_to_dict(const SweepResult& r) {
  py::dict d;
  d["fut_kind"] = r.point.fut_kind;
  d["launch_power_dbm"] = r.point.launch_power_dbm;
  d["n_loops"] = r.point.n_loops;
  d["snr_db"] = r.metrics.snr_db;
  d["gmi"] = r.metrics.gmi_bits;
  d["ngmi"] = r.metrics.ngmi;
  d["air_gbps"] = r.metrics.air_gbps;
  d["osnr_db"] = r.osnr_db;
  d["seed"] = r.seed;
  d["error"] = r.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "recirculating-loop optical transmission simulator";

  py::class_<SweepPoint>(m, "SweepPoint")
      .def(py::init<>())
      .def_readwrite("fut_kind", &SweepPoint::fut_kind)
      .def_readwrite("launch_power_dbm", &SweepPoint::launch_power_dbm)
      .def_readwrite("n_loops", &SweepPoint::n_loops);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("channel_count", &ExperimentConfig::channel_count)
      .def_readwrite("symbol_rate_baud", &ExperimentConfig::symbol_rate_baud)
      .def_readwrite("channel_spacing_hz", &ExperimentConfig::channel_spacing_hz)
      .def_readwrite("payload_symbols", &ExperimentConfig::payload_symbols)
      .def_readwrite("prefix_symbols", &ExperimentConfig::prefix_symbols)
      .def_readwrite("target_entropy_bits", &ExperimentConfig::target_entropy_bits)
      .def_readwrite("osnr_loading_db", &ExperimentConfig::osnr_loading_db)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("points", &ExperimentConfig::points)
      .def("validate", &ExperimentConfig::validate);

  m.def("list_presets", &list_presets);
  m.def("preset_config", &preset_config, py::arg("name"));
  m.def("parse_config_text", &parse_config_text, py::arg("text"));
  m.def("parse_config_file", &parse_config_file, py::arg("path"));
  m.def("config_hash", &config_hash, py::arg("config"));

  m.def(
      "run_point",
      [](const ExperimentConfig& cfg, std::size_t index) {
        SweepResult r;
        {
          // The GIL is only dropped around the numeric work; the result
          // dict must be built with it held.
          py::gil_scoped_release release;
          r = run_point(cfg, index);
        }
        return result_to_dict(r);
      },
      py::arg("config"), py::arg("index"));
  m.def(
      "run_sweep",
      [](const ExperimentConfig& cfg, int workers) {
        ExperimentOutput out;
        {
          py::gil_scoped_release release;
          out = run_sweep(cfg, workers);
        }
        py::list rows;
        for (const auto& r : out.results) rows.append(result_to_dict(r));
        return rows;
      },
      py::arg("config"), py::arg("workers") = 1);
  m.def(
      "run_to_files",
      [](const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int workers) {
        py::gil_scoped_release release;
        write_results(cfg, run_sweep(cfg, workers), out_dir);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("workers") = 1);

  m.def(
      "shaped_constellation",
      [](double entropy_bits) {
        const auto c = mb_shape_constellation(entropy_bits);
        return py::make_tuple(c.points, c.probabilities, c.entropy_bits);
      },
      py::arg("entropy_bits"),
      "Maxwell-Boltzmann shaped 64-QAM: (points, probabilities, entropy)");

  m.def(
      "fiber_preset",
      [](const std::string& name) {
        const auto f = make_fiber_preset(name);
        py::dict d;
        d["length_km"] = f.length_km;
        d["attenuation_db_per_km"] = f.attenuation_db_per_km;
        d["lumped_loss_db"] = f.lumped_loss_db;
        d["dispersion_ps_nm_km"] = f.dispersion_ps_nm_km;
        d["gamma_per_w_km"] = f.gamma_per_w_km;
        d["group_index"] = f.group_index;
        d["total_loss_db"] = total_loss_db(f);
        d["latency_us_per_km"] = group_delay_s(f) * 1e6 / f.length_km;
        return d;
      },
      py::arg("name"));
}
