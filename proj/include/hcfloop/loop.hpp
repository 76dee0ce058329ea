#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcfloop/fiber.hpp"
#include "hcfloop/signal.hpp"

namespace hcfloop {

struct AmplifierSpec {
  enum class Mode { fixed_gain, fixed_output_power };
  Mode mode = Mode::fixed_gain;
  double gain_db = 0.0;
  double output_dbm = 0.0;          // target total power in fixed_output_power mode
  double noise_figure_db = 5.0;
  double max_output_dbm = 30.0;

  void validate() const;
};

// Scales the field by sqrt(G) and adds ASE as white complex Gaussian noise
// over the simulation bandwidth, per polarization PSD (G-1)*NF*h*nu/2.
SignalBlock amplify(SignalBlock s, const AmplifierSpec& amp, std::uint64_t seed);

SignalBlock attenuate(SignalBlock s, double loss_db);

// Attenuates to an exact total power; throws "VOA cannot amplify" when the
// input is already below the target.
SignalBlock voa_to_target(SignalBlock s, double target_dbm);

// Brick-wall filter bank on the grid: every channel passband is attenuated to
// the weakest channel's power and everything between/outside passbands is
// removed. Attenuations are always >= 0 dB.
SignalBlock wss_equalize(SignalBlock s, const ChannelGrid& grid);

// Adds white noise so the given channel sees target_osnr_db in the reference
// bandwidth. Used for receiver-side noise loading and linear-regime tests.
SignalBlock noise_load(SignalBlock s, const ChannelGrid& grid, std::size_t channel,
                       double target_osnr_db, std::uint64_t seed,
                       double ref_bandwidth_hz = constants::osnr_reference_bandwidth_hz);

// One recirculating-loop circulation, in order: coupler+AOM loss, booster
// (total output = launch power), VOA1 trim, fiber under test, VOA2 to the
// buffering input target, buffering fiber, first pair amplifier (fixed gain),
// WSS equalizer, second pair amplifier trimmed so the net loop gain at the
// monitor point is 0 dB.
struct LoopConfig {
  FiberSpec fut;
  FiberSpec buffering;
  ChannelGrid grid;
  int n_loops = 1;
  double launch_power_dbm = 17.0;    // total power into the FUT
  double buffering_input_dbm = 10.2; // VOA2 target
  double coupler_loss_db = 3.0;
  double aom_loss_db = 3.0;
  AmplifierSpec booster;             // forced to fixed_output_power = launch
  AmplifierSpec pair1;               // fixed gain
  AmplifierSpec pair2;               // gain set per pass for 0 dB net loop gain
  double overhead_delay_us = 5.08;   // lumps amplifiers, WSS and patch cords
  double monitor_interval_us = 1.0;
  StepControl step;

  void validate() const;
  double per_loop_delay_us() const;
};

LoopConfig default_loop_config(const std::string& fut_preset, const ChannelGrid& grid);

// Stylized monitor-photodiode record: piecewise-constant power with a +3 dB,
// two-sample spike at every loop boundary.
struct PowerTrace {
  double start_time_s = 0.0;
  double sample_interval_s = 1e-6;
  std::vector<double> power_dbm;
  std::vector<std::size_t> boundary_markers;  // one spike index per loop
};

struct StageRecord {
  int loop_index = 0;  // 1-based
  std::string stage;
  double in_dbm = 0.0;
  double out_dbm = 0.0;
  double gain_db = 0.0;  // positive gain or negative loss applied
};

struct LoopLog {
  std::vector<StageRecord> stages;
  std::vector<double> monitor_dbm;   // per circulation
  double per_loop_delay_us = 0.0;
};

struct LoopRunResult {
  SignalBlock rx;  // tapped after the second pair amplifier
  PowerTrace trace;
  LoopLog log;
};

LoopRunResult run_loop(SignalBlock tx, const LoopConfig& cfg, std::uint64_t seed);

// Two-column text export (time_us, power_dbm) plus a ".markers" sidecar with
// one spike sample index per line. read_trace works without the sidecar.
void write_trace(const PowerTrace& t, const std::string& path);
PowerTrace read_trace(const std::string& path);

}  // namespace hcfloop
