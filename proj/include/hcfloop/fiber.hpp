#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hcfloop/signal.hpp"

namespace hcfloop {

// One fiber span. Dispersion is a single beta2 evaluated at the signal's
// center wavelength (no slope); lumped loss models connectors/splices and is
// applied at the span end.
struct FiberSpec {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.0;
  double lumped_loss_db = 0.0;
  double dispersion_ps_nm_km = 0.0;
  double gamma_per_w_km = 0.0;
  double group_index = 1.0;
  double reference_wavelength_nm = constants::default_wavelength_nm;
  // Optional wavelength-dependent distributed loss: (wavelength_nm, dB/km)
  // rows, linearly interpolated across the simulation band. Overrides the
  // scalar attenuation inside the band when present.
  std::vector<std::pair<double, double>> loss_table;

  void validate() const;
};

// Named presets: "smf", "hcf", "buffering_smf".
FiberSpec make_fiber_preset(const std::string& name);

// Step sizing for the split-step solver. In adaptive mode the step is chosen
// so the per-step nonlinear phase at the instantaneous peak power stays below
// max_nonlinear_phase_rad (and never exceeds max_step_km).
struct StepControl {
  enum class Mode { fixed, adaptive };
  Mode mode = Mode::adaptive;
  double max_step_km = 0.1;
  double max_nonlinear_phase_rad = 3e-3;

  void validate() const;
};

struct StepRecord {
  double z_km = 0.0;         // position at the start of the step
  double step_km = 0.0;
  double peak_phase_rad = 0.0;  // nonlinear phase actually applied at the peak
};

struct PropagationLog {
  std::vector<StepRecord> steps;
};

// Symmetric split-step Fourier solution of the dual-polarization Manakov
// equation: linear half-steps (dispersion + loss) in the frequency domain
// around a nonlinear phase rotation exp(i*(8/9)*gamma*(|x|^2+|y|^2)*h_eff)
// common to both polarizations. Group delay is bookkept, not applied.
SignalBlock propagate(SignalBlock s, const FiberSpec& fiber, const StepControl& ctl = {},
                      PropagationLog* log = nullptr);

double total_loss_db(const FiberSpec& f);
double group_delay_s(const FiberSpec& f);
double beta2_s2_per_km(const FiberSpec& f, double carrier_hz);

// Parses a two-column text file (wavelength_nm, dB/km) into a loss table.
std::vector<std::pair<double, double>> load_loss_table(const std::string& path);

}  // namespace hcfloop
