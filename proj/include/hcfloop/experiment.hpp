#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hcfloop/loop.hpp"
#include "hcfloop/metrics.hpp"
#include "hcfloop/rxdsp.hpp"
#include "hcfloop/signal.hpp"
#include "hcfloop/txchain.hpp"

namespace hcfloop {

// One sweep point: a fibre under test at a launch power for a loop count.
struct SweepPoint {
  std::string fut_kind;       // "hcf" or "smf"
  double launch_power_dbm = 0.0;
  int n_loops = 1;
};

// Full description of a transmission experiment. Parsed from an INI-style
// config file; presets provide ready-made instances.
struct ExperimentConfig {
  std::string name = "custom";

  // Signal plan
  int channel_count = 3;
  double symbol_rate_baud = 16e9;
  double channel_spacing_hz = 25e9;
  double center_wavelength_nm = constants::default_wavelength_nm;
  int payload_symbols = 32768;
  int prefix_symbols = 4096;
  int samples_per_symbol = 0;  // 0 = choose from the WDM bandwidth
  double target_entropy_bits = 5.7;
  TxChain tx;

  // Loop plan (fibre specs and budget come from presets keyed by fut_kind)
  double hcf_length_km = 1.085;
  double smf_length_km = 1.1;
  double loop_input_dbm = 13.0;  // signal power delivered to the loop input
  LoopConfig loop_template;

  // Receiver
  DspConfig dsp;
  double osnr_loading_db = 0.0;  // 0 = off; receiver-side noise loading

  // Sweep
  std::vector<SweepPoint> points;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SweepResult {
  SweepPoint point;
  MetricsRecord metrics;
  double osnr_db = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success; sweep continues past failed points
};

struct ExperimentOutput {
  std::vector<SweepResult> results;
  std::vector<std::pair<std::string, PowerTrace>> traces;  // label -> trace
};

// Named presets. "fig2" is the full-scale plan, "fig2-scaled" a reduced one
// with the same physics that runs in minutes on a desktop.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> list_presets();

// INI-style parsing: [section] headers, key = value lines, '#' comments.
// Unknown sections or keys are errors, as are malformed values.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Run one point end to end: shaped symbols, WDM mux, recirculating loop,
// receiver DSP and metrics. Deterministic in (config, point index).
SweepResult run_point(const ExperimentConfig& cfg, std::size_t point_index,
                      PowerTrace* trace_out = nullptr);

// Run every point, optionally across a worker pool. Results keep the config
// order regardless of worker count.
ExperimentOutput run_sweep(const ExperimentConfig& cfg, int workers = 1);

// Output bundle: results.csv, manifest.json, traces/*.txt and a constellation
// table, all under out_dir.
void write_results(const ExperimentConfig& cfg, const ExperimentOutput& out,
                   const std::filesystem::path& out_dir);

// Stable content hash of a config (field order independent of source text).
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace hcfloop
