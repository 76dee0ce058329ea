#include "hcfloop/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hcfloop/fft.hpp"

namespace hcfloop {

namespace {
constexpr double kManakov = 8.0 / 9.0;
constexpr double kDbToNat = std::numbers::ln10 / 10.0;  // dB/km -> 1/km (power)
}  // namespace

void FiberSpec::validate() const {
  if (length_km < 0.0) throw std::invalid_argument("negative fiber length");
  if (attenuation_db_per_km < 0.0) throw std::invalid_argument("negative attenuation");
  if (lumped_loss_db < 0.0) throw std::invalid_argument("negative lumped loss");
  if (gamma_per_w_km < 0.0) throw std::invalid_argument("negative Kerr coefficient");
  if (group_index < 1.0) throw std::invalid_argument("group index below 1");
  if (!(reference_wavelength_nm > 0.0))
    throw std::invalid_argument("reference wavelength must be positive");
  for (std::size_t i = 0; i < loss_table.size(); ++i) {
    if (!(loss_table[i].first > 0.0) || loss_table[i].second < 0.0)
      throw std::invalid_argument("invalid loss table row");
    if (i > 0 && !(loss_table[i].first > loss_table[i - 1].first))
      throw std::invalid_argument("loss table wavelengths must be strictly ascending");
  }
}

FiberSpec make_fiber_preset(const std::string& name) {
  FiberSpec f;
  if (name == "smf" || name == "buffering_smf") {
    f.length_km = name == "smf" ? 1.1 : 45.6;
    f.attenuation_db_per_km = 0.20;
    f.lumped_loss_db = 0.0;
    f.dispersion_ps_nm_km = 17.0;
    f.gamma_per_w_km = 1.3;
    f.group_index = 1.4682;
  } else if (name == "hcf") {
    f.length_km = 1.085;
    f.attenuation_db_per_km = 1.5;
    f.lumped_loss_db = 4.07;
    f.dispersion_ps_nm_km = 3.0;
    f.gamma_per_w_km = 1.3e-4;
    f.group_index = 1.0003;
  } else {
    throw std::invalid_argument("unknown fiber preset '" + name + "'");
  }
  return f;
}

void StepControl::validate() const {
  if (!(max_step_km > 0.0)) throw std::invalid_argument("max step must be positive");
  if (!(max_nonlinear_phase_rad > 0.0))
    throw std::invalid_argument("max nonlinear phase must be positive");
}

double total_loss_db(const FiberSpec& f) {
  f.validate();
  return f.length_km * f.attenuation_db_per_km + f.lumped_loss_db;
}

double group_delay_s(const FiberSpec& f) {
  f.validate();
  return f.length_km * 1e3 * f.group_index / constants::speed_of_light_mps;
}

double beta2_s2_per_km(const FiberSpec& f, double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  const double lambda_m = constants::speed_of_light_mps / carrier_hz;
  const double d_si = f.dispersion_ps_nm_km * 1e-6;  // s/m^2
  return -d_si * lambda_m * lambda_m / (2.0 * std::numbers::pi * constants::speed_of_light_mps) *
         1e3;
}

std::vector<std::pair<double, double>> load_loss_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open loss table " + path);
  std::vector<std::pair<double, double>> table;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double nm, db;
    if (row >> nm >> db) table.emplace_back(nm, db);
  }
  if (table.empty()) throw std::runtime_error("loss table " + path + " holds no rows");
  std::sort(table.begin(), table.end());
  return table;
}

namespace {

double interpolate_loss(const std::vector<std::pair<double, double>>& table, double nm) {
  if (nm <= table.front().first) return table.front().second;
  if (nm >= table.back().first) return table.back().second;
  auto hi = std::lower_bound(table.begin(), table.end(), std::make_pair(nm, 0.0));
  auto lo = hi - 1;
  const double w = (nm - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

// Frequency-domain multiplier for one linear segment of d_km: anomalous or
// normal dispersion phase plus distributed loss, per bin.
struct LinearOperator {
  std::vector<double> phase_per_km;  // (beta2/2) * omega^2
  std::vector<double> alpha_nat;     // power attenuation, 1/km, per bin
  double cached_d = -1.0;
  std::vector<cplx> cached;

  const std::vector<cplx>& multiplier(double d_km) {
    if (d_km == cached_d) return cached;
    cached.resize(phase_per_km.size());
    for (std::size_t k = 0; k < cached.size(); ++k) {
      const double attn = std::exp(-0.5 * alpha_nat[k] * d_km);
      const double ph = phase_per_km[k] * d_km;
      cached[k] = attn * cplx(std::cos(ph), std::sin(ph));
    }
    cached_d = d_km;
    return cached;
  }
};

void apply_linear(SignalBlock& s, LinearOperator& op, double d_km) {
  const auto& m = op.multiplier(d_km);
  fft::forward(s.x);
  fft::forward(s.y);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s.x[k] *= m[k];
    s.y[k] *= m[k];
  }
  fft::inverse(s.x);
  fft::inverse(s.y);
}

double peak_power_w(const SignalBlock& s) {
  double peak = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    peak = std::max(peak, std::norm(s.x[i]) + std::norm(s.y[i]));
  return peak;
}

}  // namespace

SignalBlock propagate(SignalBlock s, const FiberSpec& fiber, const StepControl& ctl,
                      PropagationLog* log) {
  s.validate();
  fiber.validate();
  ctl.validate();

  const double lumped_scale = std::pow(10.0, -fiber.lumped_loss_db / 20.0);
  if (fiber.length_km == 0.0) {
    for (auto& v : s.x) v *= lumped_scale;
    for (auto& v : s.y) v *= lumped_scale;
    return s;
  }

  const std::size_t n = s.size();
  const double beta2 = beta2_s2_per_km(fiber, s.center_frequency);
  const double alpha_nat_flat = fiber.attenuation_db_per_km * kDbToNat;

  LinearOperator lin;
  lin.phase_per_km.resize(n);
  lin.alpha_nat.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft::bin_frequency_hz(k, n, s.sample_rate);
    const double omega = 2.0 * std::numbers::pi * f;
    lin.phase_per_km[k] = 0.5 * beta2 * omega * omega;
    lin.alpha_nat[k] =
        fiber.loss_table.empty()
            ? alpha_nat_flat
            : interpolate_loss(fiber.loss_table, hz_to_wavelength_nm(s.center_frequency + f)) *
                  kDbToNat;
  }

  const double gamma_eff = kManakov * fiber.gamma_per_w_km;
  auto choose_step = [&](double remaining) {
    double h = std::min(ctl.max_step_km, remaining);
    if (ctl.mode == StepControl::Mode::adaptive && gamma_eff > 0.0) {
      const double peak = peak_power_w(s);
      if (peak > 0.0) h = std::min(h, 0.9 * ctl.max_nonlinear_phase_rad / (gamma_eff * peak));
    }
    return std::min(h, remaining);
  };

  // Symmetric split steps with merged linear halves: L(h1/2) N(h1)
  // L((h1+h2)/2) N(h2) ... N(hM) L(hM/2), one FFT pair per linear segment.
  double z = 0.0;
  double h = choose_step(fiber.length_km);
  apply_linear(s, lin, 0.5 * h);
  while (true) {
    if (!std::isfinite(s.x[0].real()) || !std::isfinite(s.x[0].imag()))
      throw std::runtime_error("non-finite field during propagation at km " + std::to_string(z));

    // The field currently sits at the step midpoint; the loss-aware effective
    // length makes a constant-power step accumulate the exact analytic phase.
    const double a = lin.alpha_nat[0];
    const double h_eff = fiber.loss_table.empty() && a > 0.0
                             ? (2.0 / a) * std::sinh(0.5 * a * h)
                             : h;
    double peak_phase = 0.0;
    if (gamma_eff > 0.0) {
      const double k_nl = gamma_eff * h_eff;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(s.x[i]) + std::norm(s.y[i]);
        const double phi = k_nl * p;
        peak_phase = std::max(peak_phase, phi);
        const cplx rot(std::cos(phi), std::sin(phi));
        s.x[i] *= rot;
        s.y[i] *= rot;
      }
    }
    if (log) log->steps.push_back({z, h, peak_phase});

    z += h;
    const double remaining = fiber.length_km - z;
    if (remaining <= 1e-12) {
      apply_linear(s, lin, 0.5 * h);
      break;
    }
    const double h_next = choose_step(remaining);
    apply_linear(s, lin, 0.5 * (h + h_next));
    h = h_next;
  }

  for (auto& v : s.x) v *= lumped_scale;
  for (auto& v : s.y) v *= lumped_scale;
  return s;
}

}  // namespace hcfloop
