#pragma once

#include <vector>

#include "hcfloop/signal.hpp"
#include "hcfloop/txchain.hpp"

namespace hcfloop {

// Receiver DSP knobs. The chain is strictly linear and data-aided: channel
// selection, CD compensation, matched filtering with correlation timing sync,
// a T/2-spaced 2x2 LMS butterfly trained on known symbols then frozen, and
// block carrier-phase recovery.
struct DspConfig {
  int eq_taps = 31;
  double eq_step = 1e-3;
  int eq_passes = 2;
  int cpe_block = 64;
  int prefix_symbols = 4096;          // training prefix, excluded from metrics
  double total_dispersion_ps_per_nm = 0.0;

  void validate() const;
};

// Brick-wall selection of one grid channel (passband width = spacing) followed
// by a shift to baseband. The output keeps the composite sample rate.
SignalBlock select_channel(SignalBlock s, const ChannelGrid& grid, std::size_t index);

// Exact inverse of the accumulated linear dispersion operator.
SignalBlock cd_compensate(SignalBlock s, double total_dispersion_ps_per_nm);

struct SymbolStream {
  std::vector<cplx> x;
  std::vector<cplx> y;
};

struct TimingResult {
  SymbolStream at2sps;
  long sample_offset = 0;   // recovered alignment in composite-rate samples
  double corr_ratio = 0.0;  // normalized prefix correlation peak
};

// RRC matched filter at the composite rate, timing alignment by maximum
// correlation against the known training prefix (robust to polarization
// mixing), then decimation to 2 samples/symbol.
TimingResult matched_filter_downsample(const SignalBlock& s, const TxChain& chain,
                                       const std::vector<cplx>& prefix_x,
                                       const std::vector<cplx>& prefix_y);

// Data-aided T/2 butterfly equalizer: LMS-trained over the known streams for
// eq_passes passes, then frozen for the inference pass. Output is one sample
// per symbol. Throws "equalizer diverged" when training fails.
SymbolStream equalize_2x2(const SymbolStream& in2sps, const std::vector<cplx>& known_x,
                          const std::vector<cplx>& known_y, const DspConfig& dsp);

struct CpeResult {
  SymbolStream out;
  std::vector<double> phase_x;  // one recovered phase per block
  std::vector<double> phase_y;
};

// Per-block phase = arg(sum r*conj(a)) over the known symbols of the block,
// removed from every symbol of that block.
CpeResult carrier_phase_recover(const SymbolStream& in, const std::vector<cplx>& known_x,
                                const std::vector<cplx>& known_y, int block_symbols);

}  // namespace hcfloop
