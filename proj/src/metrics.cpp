#include "hcfloop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hcfloop/fft.hpp"

namespace hcfloop {
namespace {

constexpr double kSnrCapDb = 60.0;

struct PolFit {
  double signal_energy = 0.0;
  double residual_energy = 0.0;
  double noise_variance = 0.0;
  std::vector<cplx> aligned;  // rx divided by the fitted gain
};

// Complex least-squares gain of rx against ref, residuals in the ref scale.
PolFit fit_polarization(const std::vector<cplx>& rx, const std::vector<cplx>& ref,
                        bool keep_aligned) {
  if (rx.size() != ref.size()) throw std::invalid_argument("length mismatch");
  if (rx.empty()) throw std::invalid_argument("no symbols to compare");
  cplx cross = 0.0;
  double ref_energy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    cross += rx[i] * std::conj(ref[i]);
    ref_energy += std::norm(ref[i]);
  }
  if (!(ref_energy > 0.0)) throw std::invalid_argument("reference has no energy");
  const cplx g = cross / ref_energy;
  if (!(std::norm(g) > 0.0)) throw std::invalid_argument("received signal is orthogonal to the reference");

  PolFit fit;
  fit.signal_energy = ref_energy;
  if (keep_aligned) fit.aligned.resize(rx.size());
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const cplx a = rx[i] / g;
    fit.residual_energy += std::norm(a - ref[i]);
    if (keep_aligned) fit.aligned[i] = a;
  }
  fit.noise_variance = fit.residual_energy / static_cast<double>(rx.size());
  return fit;
}

int gray_code(int v) { return v ^ (v >> 1); }

}  // namespace

double estimate_snr_db(const std::vector<cplx>& rx_x, const std::vector<cplx>& rx_y,
                       const std::vector<cplx>& ref_x, const std::vector<cplx>& ref_y) {
  const auto fx = fit_polarization(rx_x, ref_x, false);
  const auto fy = fit_polarization(rx_y, ref_y, false);
  const double signal = fx.signal_energy + fy.signal_energy;
  const double noise = fx.residual_energy + fy.residual_energy;
  if (!(noise > 0.0)) return kSnrCapDb;
  return std::min(kSnrCapDb, 10.0 * std::log10(signal / noise));
}

double estimate_gmi_bits(const std::vector<cplx>& rx_x, const std::vector<cplx>& rx_y,
                         const std::vector<cplx>& ref_x, const std::vector<cplx>& ref_y,
                         const ShapedConstellation& constellation) {
  constellation.validate();
  if (rx_x.size() < 1024 || rx_y.size() < 1024)
    throw std::invalid_argument("insufficient sample size");

  const auto order = constellation.points.size();
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  const int bits = static_cast<int>(std::lround(std::log2(static_cast<double>(order))));
  const int half_bits = bits / 2;

  // Gray labels per quadrature rail, matching the row-major point layout.
  std::vector<int> label(order);
  for (std::size_t i = 0; i < order; ++i) {
    const int row = static_cast<int>(i) / side;
    const int col = static_cast<int>(i) % side;
    label[i] = (gray_code(col) << half_bits) | gray_code(row);
  }
  std::vector<double> log_prior(order);
  for (std::size_t i = 0; i < order; ++i)
    log_prior[i] = constellation.probabilities[i] > 0.0
                       ? std::log(constellation.probabilities[i])
                       : -1e300;

  double bit_info_sum = 0.0;
  std::size_t total = 0;
  std::vector<double> expo(order);

  auto accumulate_pol = [&](const std::vector<cplx>& rx, const std::vector<cplx>& ref) {
    const auto fit = fit_polarization(rx, ref, true);
    const double sigma_sq = std::max(fit.noise_variance, 1e-30);
    for (std::size_t i = 0; i < rx.size(); ++i) {
      const auto sent = nearest_point_index(constellation, ref[i]);
      double peak = -1e300;
      for (std::size_t c = 0; c < order; ++c) {
        expo[c] = log_prior[c] - std::norm(fit.aligned[i] - constellation.points[c]) / sigma_sq;
        peak = std::max(peak, expo[c]);
      }
      double den = 0.0;
      for (std::size_t c = 0; c < order; ++c) {
        expo[c] = std::exp(expo[c] - peak);
        den += expo[c];
      }
      for (int k = 0; k < bits; ++k) {
        const int sent_bit = (label[sent] >> k) & 1;
        double num = 0.0;
        for (std::size_t c = 0; c < order; ++c)
          if (((label[c] >> k) & 1) == sent_bit) num += expo[c];
        bit_info_sum += std::log2(num / den);
      }
      ++total;
    }
  };
  accumulate_pol(rx_x, ref_x);
  accumulate_pol(rx_y, ref_y);

  const double gmi =
      constellation.entropy_bits + bit_info_sum / static_cast<double>(total);
  return std::clamp(gmi, 0.0, constellation.entropy_bits);
}

double compute_ngmi(double gmi_bits, const ShapedConstellation& constellation) {
  constellation.validate();
  const double m = std::log2(static_cast<double>(constellation.base_order));
  return 1.0 - (constellation.entropy_bits - gmi_bits) / m;
}

double compute_air_gbps(double gmi_bits, double symbol_rate_baud) {
  if (gmi_bits < 0.0) throw std::invalid_argument("negative information rate");
  if (!(symbol_rate_baud > 0.0)) throw std::invalid_argument("symbol rate must be positive");
  return 2.0 * symbol_rate_baud * gmi_bits / 1e9;
}

namespace {

// Welch power spectral density, Hann window, 50% overlap, both polarizations
// combined. Returned in W/Hz against the FFT bin layout of length n_fft.
std::vector<double> welch_psd(const SignalBlock& s, std::size_t n_fft) {
  std::vector<double> window(n_fft);
  double window_power = 0.0;
  for (std::size_t i = 0; i < n_fft; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(n_fft)));
    window_power += window[i] * window[i];
  }
  std::vector<double> psd(n_fft, 0.0);
  std::vector<cplx> seg(n_fft);
  std::size_t segments = 0;
  const std::size_t hop = n_fft / 2;
  for (const auto* rail : {&s.x, &s.y}) {
    for (std::size_t start = 0; start + n_fft <= rail->size(); start += hop) {
      for (std::size_t i = 0; i < n_fft; ++i) seg[i] = (*rail)[start + i] * window[i];
      fft::forward(seg);
      for (std::size_t k = 0; k < n_fft; ++k) psd[k] += std::norm(seg[k]);
      ++segments;
    }
  }
  if (segments == 0) throw std::invalid_argument("signal shorter than one spectral segment");
  const double scale = 1.0 / (static_cast<double>(segments) * window_power * s.sample_rate);
  for (auto& v : psd) v *= scale;
  return psd;
}

}  // namespace

double measure_osnr_db(const SignalBlock& s, const ChannelGrid& grid, std::size_t channel,
                       double occupied_bandwidth_hz, double reference_bandwidth_hz) {
  s.validate();
  grid.validate();
  if (channel >= grid.count()) throw std::out_of_range("channel index outside grid");
  if (!(occupied_bandwidth_hz > 0.0) || !(reference_bandwidth_hz > 0.0))
    throw std::invalid_argument("bandwidths must be positive");
  if (occupied_bandwidth_hz >= grid.channel_spacing_hz)
    throw std::runtime_error("OSNR not measurable spectrally");

  std::size_t n_fft = 1;
  while (2 * n_fft <= s.size() && n_fft < 32768) n_fft *= 2;
  const auto psd = welch_psd(s, n_fft);
  const double bin_hz = s.sample_rate / static_cast<double>(n_fft);
  const double off = grid.offset_hz(channel);
  const double edge_hz = 8.0 * bin_hz;

  double signal_plus_noise = 0.0;
  std::size_t occupied_bins = 0;
  double guard_sum = 0.0;
  std::size_t guard_bins = 0;
  for (std::size_t k = 0; k < n_fft; ++k) {
    const double f = fft::bin_frequency_hz(k, n_fft, s.sample_rate);
    const double d = std::abs(f - off);
    if (d < occupied_bandwidth_hz / 2.0) {
      signal_plus_noise += psd[k];
      ++occupied_bins;
    } else if (d >= occupied_bandwidth_hz / 2.0 + edge_hz &&
               d < grid.channel_spacing_hz / 2.0 - edge_hz) {
      guard_sum += psd[k];
      ++guard_bins;
    }
  }
  if (guard_bins < 4) throw std::runtime_error("OSNR not measurable spectrally");
  if (occupied_bins == 0) throw std::runtime_error("occupied band narrower than one bin");

  const double noise_psd = guard_sum / static_cast<double>(guard_bins);
  const double signal_w =
      (signal_plus_noise - noise_psd * static_cast<double>(occupied_bins)) * bin_hz;
  if (!(noise_psd > 0.0)) return kSnrCapDb;
  const double osnr =
      10.0 * std::log10(std::max(signal_w, 1e-300) / (noise_psd * reference_bandwidth_hz));
  return std::min(osnr, kSnrCapDb);
}

namespace {

std::vector<std::size_t> detect_spikes(const PowerTrace& trace) {
  std::vector<double> sorted = trace.power_dbm;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::vector<std::size_t> spikes;
  bool in_spike = false;
  for (std::size_t i = 0; i < trace.power_dbm.size(); ++i) {
    if (trace.power_dbm[i] >= median + 2.0) {
      if (!in_spike) spikes.push_back(i);
      in_spike = true;
    } else {
      in_spike = false;
    }
  }
  return spikes;
}

}  // namespace

LatencyReport extract_latency(const PowerTrace& trace, double fut_length_km,
                              double common_delay_us) {
  if (trace.power_dbm.empty()) throw std::invalid_argument("empty trace");
  if (!(trace.sample_interval_s > 0.0))
    throw std::invalid_argument("trace sample interval must be positive");
  if (!(fut_length_km > 0.0)) throw std::invalid_argument("fiber length must be positive");
  if (common_delay_us < 0.0) throw std::invalid_argument("negative common delay");

  std::vector<std::size_t> markers = trace.boundary_markers;
  if (markers.size() < 2) markers = detect_spikes(trace);
  if (markers.size() < 2) throw std::runtime_error("insufficient markers");

  const double dt_us = trace.sample_interval_s * 1e6;
  std::vector<double> spacing;
  for (std::size_t i = 1; i < markers.size(); ++i)
    spacing.push_back(static_cast<double>(markers[i] - markers[i - 1]) * dt_us);
  double mean = 0.0;
  for (double v : spacing) mean += v;
  mean /= static_cast<double>(spacing.size());
  double var = 0.0;
  for (double v : spacing) var += (v - mean) * (v - mean);
  var /= static_cast<double>(spacing.size());

  LatencyReport report;
  report.per_loop_delay_us = mean;
  report.total_duration_us =
      static_cast<double>(markers.back() - markers.front()) * dt_us + mean;
  report.per_km_latency_us = (mean - common_delay_us) / fut_length_km;
  report.jitter_warning = std::sqrt(var) > 0.01 * mean;
  return report;
}

double latency_differential_us_per_km(const LatencyReport& a, const LatencyReport& b) {
  return a.per_km_latency_us - b.per_km_latency_us;
}

}  // namespace hcfloop
