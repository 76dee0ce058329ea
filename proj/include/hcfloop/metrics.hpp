#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcfloop/constellation.hpp"
#include "hcfloop/loop.hpp"
#include "hcfloop/signal.hpp"

namespace hcfloop {

struct MetricsRecord {
  double snr_db = 0.0;
  double gmi_bits = 0.0;
  double ngmi = 0.0;
  double air_gbps = 0.0;
};

// Effective SNR from received symbols against the transmitted references.
// A single complex least-squares gain per polarization removes residual
// scale/rotation; the pooled residual power over both rails gives the noise
// estimate. Result is capped at 60 dB so ideal back-to-back runs stay finite.
double estimate_snr_db(const std::vector<cplx>& rx_x, const std::vector<cplx>& rx_y,
                       const std::vector<cplx>& ref_x, const std::vector<cplx>& ref_y);

// Bit-metric decoding mutual information for a square QAM constellation with
// shaped priors and Gray bit labels, evaluated by Monte Carlo over the
// received symbols with a circular-Gaussian channel law whose variance comes
// from the least-squares residuals. Needs at least 1024 symbols per rail.
double estimate_gmi_bits(const std::vector<cplx>& rx_x, const std::vector<cplx>& rx_y,
                         const std::vector<cplx>& ref_x, const std::vector<cplx>& ref_y,
                         const ShapedConstellation& constellation);

// Normalized GMI and the dual-polarization information rate at a symbol rate.
double compute_ngmi(double gmi_bits, const ShapedConstellation& constellation);
double compute_air_gbps(double gmi_bits, double symbol_rate_baud);

// Optical SNR from the spectrum itself: signal power integrated over the
// occupied band around the channel center, noise PSD taken from the guard
// strips between channels (skipping 8 bins at each band edge), rescaled to
// the reference bandwidth. Throws when the grid leaves no guard strip.
double measure_osnr_db(const SignalBlock& s, const ChannelGrid& grid, std::size_t channel,
                       double occupied_bandwidth_hz,
                       double reference_bandwidth_hz = constants::osnr_reference_bandwidth_hz);

struct LatencyReport {
  double per_loop_delay_us = 0.0;     // mean spacing between loop boundaries
  double per_km_latency_us = 0.0;     // fibre-only contribution per km
  double differential_us_per_km = 0.0;
  double total_duration_us = 0.0;     // first to last boundary
  bool jitter_warning = false;        // boundary spacing spread above 1%
};

// Timing extraction from a power monitor trace: loop boundaries come from the
// recorded markers, the common (non-fibre) per-loop overhead is subtracted to
// isolate the per-km fibre delay.
LatencyReport extract_latency(const PowerTrace& trace, double fut_length_km,
                              double common_delay_us);

// Difference in per-km latency between two traces of the same loop geometry
// with different fibres under test.
double latency_differential_us_per_km(const LatencyReport& a, const LatencyReport& b);

}  // namespace hcfloop
