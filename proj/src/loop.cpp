#include "hcfloop/loop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hcfloop/fft.hpp"
#include "hcfloop/rng.hpp"

namespace hcfloop {

void AmplifierSpec::validate() const {
  if (noise_figure_db < 0.0) throw std::invalid_argument("negative noise figure");
  if (mode == Mode::fixed_output_power && max_output_dbm < output_dbm)
    throw std::invalid_argument("amplifier target above its maximum output");
}

namespace {

void add_white_noise(SignalBlock& s, double variance_per_pol, std::uint64_t seed) {
  if (variance_per_pol <= 0.0) return;
  GaussianRng rng(seed);
  const double sigma_q = std::sqrt(variance_per_pol / 2.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.x[i] += cplx(sigma_q * rng.next(), sigma_q * rng.next());
    s.y[i] += cplx(sigma_q * rng.next(), sigma_q * rng.next());
  }
}

}  // namespace

SignalBlock amplify(SignalBlock s, const AmplifierSpec& amp, std::uint64_t seed) {
  amp.validate();
  s.validate();
  const double gain_db = amp.mode == AmplifierSpec::Mode::fixed_gain
                             ? amp.gain_db
                             : amp.output_dbm - measure_power_dbm(s);
  if (gain_db < 0.0) throw std::runtime_error("attenuation requested from amplifier");
  const double g = std::pow(10.0, gain_db / 10.0);
  const double scale = std::sqrt(g);
  for (auto& v : s.x) v *= scale;
  for (auto& v : s.y) v *= scale;

  // Spontaneous emission spread flat over the whole simulation bandwidth,
  // independent between polarizations.
  const double nf = std::pow(10.0, amp.noise_figure_db / 10.0);
  const double psd_per_pol = (g - 1.0) * nf * constants::planck_js * s.center_frequency / 2.0;
  add_white_noise(s, psd_per_pol * s.sample_rate, seed);

  if (measure_power_dbm(s) > amp.max_output_dbm + 1e-9)
    throw std::runtime_error("amplifier saturation");
  return s;
}

SignalBlock attenuate(SignalBlock s, double loss_db) {
  if (loss_db < 0.0) throw std::invalid_argument("negative attenuation");
  const double scale = std::pow(10.0, -loss_db / 20.0);
  for (auto& v : s.x) v *= scale;
  for (auto& v : s.y) v *= scale;
  return s;
}

SignalBlock voa_to_target(SignalBlock s, double target_dbm) {
  const double in_dbm = measure_power_dbm(s);
  // The 1 mdB slack absorbs the signal/ASE beat term of a preceding
  // fixed-output amplifier; a passive VOA still never applies gain.
  if (in_dbm < target_dbm - 1e-3) throw std::runtime_error("VOA cannot amplify");
  return attenuate(std::move(s), std::max(0.0, in_dbm - target_dbm));
}

SignalBlock wss_equalize(SignalBlock s, const ChannelGrid& grid) {
  s.validate();
  grid.validate();
  const std::size_t n = s.size();
  fft::forward(s.x);
  fft::forward(s.y);

  std::vector<int> band_of(n, -1);
  std::vector<double> band_power(grid.count(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft::bin_frequency_hz(k, n, s.sample_rate);
    for (std::size_t c = 0; c < grid.count(); ++c) {
      if (std::abs(f - grid.offset_hz(c)) < grid.channel_spacing_hz / 2.0) {
        band_of[k] = static_cast<int>(c);
        band_power[c] += std::norm(s.x[k]) + std::norm(s.y[k]);
        break;
      }
    }
  }
  const double weakest = *std::min_element(band_power.begin(), band_power.end());
  if (!(weakest > 0.0)) throw std::domain_error("zero power signal");
  std::vector<double> scale(grid.count());
  for (std::size_t c = 0; c < grid.count(); ++c) scale[c] = std::sqrt(weakest / band_power[c]);

  for (std::size_t k = 0; k < n; ++k) {
    const double g = band_of[k] < 0 ? 0.0 : scale[static_cast<std::size_t>(band_of[k])];
    s.x[k] *= g;
    s.y[k] *= g;
  }
  fft::inverse(s.x);
  fft::inverse(s.y);
  return s;
}

SignalBlock noise_load(SignalBlock s, const ChannelGrid& grid, std::size_t channel,
                       double target_osnr_db, std::uint64_t seed, double ref_bandwidth_hz) {
  if (!(ref_bandwidth_hz > 0.0)) throw std::invalid_argument("reference bandwidth must be positive");
  const double p_ch_w = std::pow(10.0, (channel_power_dbm(s, grid, channel) - 30.0) / 10.0);
  const double osnr_lin = std::pow(10.0, target_osnr_db / 10.0);
  // Total (both polarization) noise density that puts the channel at the
  // requested OSNR in the reference bandwidth.
  const double n0 = p_ch_w / (osnr_lin * ref_bandwidth_hz);
  add_white_noise(s, n0 / 2.0 * s.sample_rate, seed);
  return s;
}

void LoopConfig::validate() const {
  fut.validate();
  buffering.validate();
  grid.validate();
  booster.validate();
  pair1.validate();
  pair2.validate();
  if (n_loops < 1) throw std::invalid_argument("loop count must be at least 1");
  if (coupler_loss_db < 0.0 || aom_loss_db < 0.0)
    throw std::invalid_argument("negative loop loss");
  if (overhead_delay_us < 0.0) throw std::invalid_argument("negative overhead delay");
  if (!(monitor_interval_us > 0.0))
    throw std::invalid_argument("monitor interval must be positive");
  step.validate();
  if (buffering_input_dbm > launch_power_dbm - total_loss_db(fut) + 1e-9)
    throw std::invalid_argument("buffering input target exceeds the launch power budget");
}

double LoopConfig::per_loop_delay_us() const {
  return (group_delay_s(fut) + group_delay_s(buffering)) * 1e6 + overhead_delay_us;
}

LoopConfig default_loop_config(const std::string& fut_preset, const ChannelGrid& grid) {
  LoopConfig cfg;
  cfg.fut = make_fiber_preset(fut_preset);
  cfg.buffering = make_fiber_preset("buffering_smf");
  cfg.grid = grid;
  cfg.booster.mode = AmplifierSpec::Mode::fixed_output_power;
  cfg.booster.noise_figure_db = 5.0;
  cfg.booster.max_output_dbm = 30.0;
  cfg.pair1.mode = AmplifierSpec::Mode::fixed_gain;
  cfg.pair1.gain_db = 11.0;
  cfg.pair1.noise_figure_db = 5.0;
  cfg.pair2.mode = AmplifierSpec::Mode::fixed_output_power;
  cfg.pair2.noise_figure_db = 5.0;
  cfg.pair2.max_output_dbm = 30.0;
  return cfg;
}

namespace {

// Stage seeds are derived from (run seed, loop, stage position) so every
// noise draw is independent and the whole run replays exactly.
enum StageId : std::uint64_t { kBooster = 1, kPair1 = 2, kPair2 = 3 };

struct StageLogger {
  LoopLog& log;
  int loop;

  template <typename Fn>
  SignalBlock apply(SignalBlock s, const char* name, Fn&& fn) {
    const double in_dbm = measure_power_dbm(s);
    SignalBlock out = fn(std::move(s));
    const double out_dbm = measure_power_dbm(out);
    log.stages.push_back({loop, name, in_dbm, out_dbm, out_dbm - in_dbm});
    return out;
  }
};

PowerTrace build_trace(const LoopConfig& cfg, const std::vector<double>& monitor_dbm) {
  PowerTrace trace;
  trace.start_time_s = 0.0;
  trace.sample_interval_s = cfg.monitor_interval_us * 1e-6;
  const double loop_samples = cfg.per_loop_delay_us() / cfg.monitor_interval_us;
  const auto total = static_cast<std::size_t>(std::llround(cfg.n_loops * loop_samples)) + 2;
  trace.power_dbm.assign(total, monitor_dbm.front());
  for (int k = 0; k < cfg.n_loops; ++k) {
    const auto seg_begin = static_cast<std::size_t>(std::llround(k * loop_samples));
    const auto seg_end = static_cast<std::size_t>(std::llround((k + 1) * loop_samples));
    for (std::size_t i = seg_begin; i < std::min(seg_end, total); ++i)
      trace.power_dbm[i] = monitor_dbm[static_cast<std::size_t>(k)];
  }
  for (int k = 1; k <= cfg.n_loops; ++k) {
    const auto m = static_cast<std::size_t>(std::llround(k * loop_samples));
    const double level = monitor_dbm[static_cast<std::size_t>(k - 1)] + 3.0;
    trace.power_dbm[m] = level;
    if (m + 1 < total) trace.power_dbm[m + 1] = level;
    trace.boundary_markers.push_back(m);
  }
  return trace;
}

}  // namespace

LoopRunResult run_loop(SignalBlock tx, const LoopConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  tx.validate();

  // The second pair amplifier restores the loop entry power, which pins the
  // net gain of one circulation to exactly 0 dB at the monitor tap.
  const double entry_dbm = measure_power_dbm(tx);

  AmplifierSpec booster = cfg.booster;
  booster.mode = AmplifierSpec::Mode::fixed_output_power;
  booster.output_dbm = cfg.launch_power_dbm;
  AmplifierSpec pair2 = cfg.pair2;
  pair2.mode = AmplifierSpec::Mode::fixed_output_power;
  pair2.output_dbm = entry_dbm;

  LoopRunResult result;
  result.log.per_loop_delay_us = cfg.per_loop_delay_us();

  SignalBlock s = std::move(tx);
  for (int loop = 1; loop <= cfg.n_loops; ++loop) {
    StageLogger stage{result.log, loop};
    try {
      s = stage.apply(std::move(s), "coupler_aom", [&](SignalBlock b) {
        return attenuate(std::move(b), cfg.coupler_loss_db + cfg.aom_loss_db);
      });
      s = stage.apply(std::move(s), "booster", [&](SignalBlock b) {
        return amplify(std::move(b), booster, derive_seed(seed, static_cast<std::uint64_t>(loop), kBooster));
      });
      s = stage.apply(std::move(s), "voa1", [&](SignalBlock b) {
        return voa_to_target(std::move(b), cfg.launch_power_dbm);
      });
      s = stage.apply(std::move(s), "fut", [&](SignalBlock b) {
        return propagate(std::move(b), cfg.fut, cfg.step);
      });
      s = stage.apply(std::move(s), "voa2", [&](SignalBlock b) {
        return voa_to_target(std::move(b), cfg.buffering_input_dbm);
      });
      s = stage.apply(std::move(s), "buffering", [&](SignalBlock b) {
        return propagate(std::move(b), cfg.buffering, cfg.step);
      });
      s = stage.apply(std::move(s), "pair1", [&](SignalBlock b) {
        return amplify(std::move(b), cfg.pair1, derive_seed(seed, static_cast<std::uint64_t>(loop), kPair1));
      });
      s = stage.apply(std::move(s), "wss", [&](SignalBlock b) {
        return wss_equalize(std::move(b), cfg.grid);
      });
      s = stage.apply(std::move(s), "pair2", [&](SignalBlock b) {
        return amplify(std::move(b), pair2, derive_seed(seed, static_cast<std::uint64_t>(loop), kPair2));
      });
    } catch (const std::exception& e) {
      throw std::runtime_error("loop " + std::to_string(loop) + ": " + e.what());
    }
    result.log.monitor_dbm.push_back(measure_power_dbm(s));
  }

  result.trace = build_trace(cfg, result.log.monitor_dbm);
  result.rx = std::move(s);
  return result;
}

void write_trace(const PowerTrace& t, const std::string& path) {
  if (t.power_dbm.empty()) throw std::invalid_argument("empty trace");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "# time_us power_dbm\n";
  out.precision(9);
  const double dt_us = t.sample_interval_s * 1e6;
  const double t0_us = t.start_time_s * 1e6;
  for (std::size_t i = 0; i < t.power_dbm.size(); ++i)
    out << t0_us + static_cast<double>(i) * dt_us << ' ' << t.power_dbm[i] << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);

  std::ofstream markers(path + ".markers");
  if (!markers) throw std::runtime_error("cannot open " + path + ".markers for writing");
  for (auto m : t.boundary_markers) markers << m << '\n';
}

PowerTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  PowerTrace t;
  std::string line;
  double first_us = 0.0, second_us = 0.0;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double time_us, power;
    if (!(row >> time_us >> power)) continue;
    if (t.power_dbm.empty())
      first_us = time_us;
    else if (t.power_dbm.size() == 1)
      second_us = time_us;
    t.power_dbm.push_back(power);
  }
  if (t.power_dbm.size() < 2) throw std::runtime_error("trace " + path + " holds fewer than 2 samples");
  t.start_time_s = first_us * 1e-6;
  t.sample_interval_s = (second_us - first_us) * 1e-6;
  if (!(t.sample_interval_s > 0.0))
    throw std::runtime_error("trace " + path + " has a non-increasing time axis");

  std::ifstream markers(path + ".markers");
  if (markers) {
    std::size_t m;
    while (markers >> m) t.boundary_markers.push_back(m);
  }
  return t;
}

}  // namespace hcfloop
