#pragma once

#include <cstdint>
#include <vector>

#include "hcfloop/signal.hpp"

namespace hcfloop {

// Transmitter configuration for one WDM channel. The sample rate of generated
// blocks is symbol_rate * samples_per_symbol (the composite simulation rate,
// shared by every channel of a run).
struct TxChain {
  double symbol_rate = 16e9;  // baud
  double rrc_rolloff = 0.1;
  int rrc_span_symbols = 32;
  int samples_per_symbol = 6;
  double tx_bandwidth_hz = 0.0;  // 0 means 0.62 * symbol_rate
  bool preemphasis_enabled = true;
  double preemphasis_clip_db = 10.0;
  double laser_linewidth_hz = 100e3;

  double bandwidth_hz() const {
    return tx_bandwidth_hz > 0.0 ? tx_bandwidth_hz : 0.62 * symbol_rate;
  }
  void validate() const;
};

// Unit-energy root-raised-cosine taps at sps samples per symbol,
// span_symbols*sps + 1 taps centered on t = 0.
std::vector<double> rrc_taps(double rolloff, int span_symbols, int sps);

// Zero-stuffs the two symbol streams and circularly convolves them with the
// RRC taps. The block is periodic by construction, so downstream circular FFT
// processing sees no wraparound artifacts. Symbol k sits at sample k*sps.
SignalBlock pulse_shape_rrc(const std::vector<cplx>& sym_x, const std::vector<cplx>& sym_y,
                            const TxChain& chain,
                            double center_frequency_hz =
                                299792458.0 / (constants::default_wavelength_nm * 1e-9),
                            std::uint64_t seed_tag = 0);

// Electrical/optical front end: inverse pre-emphasis (clipped at
// preemphasis_clip_db) followed by a fifth-order Bessel-type low-pass, modeled
// by its amplitude response, then laser phase noise as a Wiener process with
// increment variance 2*pi*linewidth*dt, common to both polarizations. The
// phase-noise stream is seeded from the block's seed_tag.
SignalBlock apply_tx_frontend(SignalBlock s, const TxChain& chain);

// Amplitude response of the front-end low-pass at frequency f (normalized so
// the response is 1 at DC and -3.01 dB at f = bandwidth).
double bessel5_amplitude(double f_hz, double bandwidth_hz);

// Shifts each channel to its grid offset and sums. Channels must share sample
// rate and length; per-channel powers are set equal before combining. The
// result is centered on the grid's middle channel.
SignalBlock wdm_multiplex(const std::vector<SignalBlock>& channels, const ChannelGrid& grid);

}  // namespace hcfloop
