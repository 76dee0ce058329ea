#include "hcfloop/txchain.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hcfloop/fft.hpp"
#include "hcfloop/rng.hpp"

namespace hcfloop {

void TxChain::validate() const {
  if (!(symbol_rate > 0.0)) throw std::invalid_argument("symbol rate must be positive");
  if (!(rrc_rolloff > 0.0) || rrc_rolloff > 1.0)
    throw std::invalid_argument("RRC rolloff must lie in (0, 1]");
  if (rrc_span_symbols < 8 || rrc_span_symbols % 2 != 0)
    throw std::invalid_argument("RRC span must be an even symbol count >= 8");
  if (samples_per_symbol < 2 || samples_per_symbol % 2 != 0)
    throw std::invalid_argument("samples per symbol must be even and >= 2");
  if (tx_bandwidth_hz < 0.0) throw std::invalid_argument("negative transmitter bandwidth");
  if (!(preemphasis_clip_db >= 0.0)) throw std::invalid_argument("negative pre-emphasis clip");
  if (laser_linewidth_hz < 0.0) throw std::invalid_argument("negative laser linewidth");
}

std::vector<double> rrc_taps(double rolloff, int span_symbols, int sps) {
  if (!(rolloff > 0.0) || rolloff > 1.0) throw std::invalid_argument("rolloff outside (0, 1]");
  if (span_symbols < 2 || sps < 1) throw std::invalid_argument("degenerate RRC support");
  const int half = span_symbols * sps / 2;
  std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
  const double pi = std::numbers::pi;
  for (int i = -half; i <= half; ++i) {
    const double t = static_cast<double>(i) / sps;
    double v;
    if (i == 0) {
      v = 1.0 - rolloff + 4.0 * rolloff / pi;
    } else if (std::abs(std::abs(t) - 1.0 / (4.0 * rolloff)) < 1e-9) {
      v = rolloff / std::sqrt(2.0) *
          ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * rolloff)) +
           (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * rolloff)));
    } else {
      const double num = std::sin(pi * t * (1.0 - rolloff)) +
                         4.0 * rolloff * t * std::cos(pi * t * (1.0 + rolloff));
      const double den = pi * t * (1.0 - std::pow(4.0 * rolloff * t, 2));
      v = num / den;
    }
    taps[static_cast<std::size_t>(i + half)] = v;
  }
  double energy = 0.0;
  for (double v : taps) energy += v * v;
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& v : taps) v *= scale;
  return taps;
}

namespace {

// Circular convolution with the tap kernel centered on index zero, so symbol
// k lands exactly on sample k*sps with no filter delay to track.
void circular_filter(std::vector<cplx>& data, const std::vector<double>& taps) {
  const auto n = static_cast<long long>(data.size());
  const auto half = static_cast<long long>(taps.size() / 2);
  std::vector<cplx> kernel(data.size(), cplx{0.0, 0.0});
  for (long long m = -half; m <= half; ++m) {
    const auto idx = static_cast<std::size_t>(((m % n) + n) % n);
    kernel[idx] += taps[static_cast<std::size_t>(m + half)];
  }
  fft::forward(kernel);
  fft::forward(data);
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= kernel[k];
  fft::inverse(data);
}

}  // namespace

SignalBlock pulse_shape_rrc(const std::vector<cplx>& sym_x, const std::vector<cplx>& sym_y,
                            const TxChain& chain, double center_frequency_hz,
                            std::uint64_t seed_tag) {
  chain.validate();
  if (sym_x.size() != sym_y.size() || sym_x.empty())
    throw std::invalid_argument("symbol rails empty or mismatched");
  if (static_cast<int>(sym_x.size()) <= chain.rrc_span_symbols)
    throw std::invalid_argument("block shorter than the RRC span");

  const auto sps = static_cast<std::size_t>(chain.samples_per_symbol);
  SignalBlock s(sym_x.size() * sps, chain.symbol_rate * static_cast<double>(sps),
                center_frequency_hz, seed_tag);
  for (std::size_t k = 0; k < sym_x.size(); ++k) {
    s.x[k * sps] = sym_x[k];
    s.y[k * sps] = sym_y[k];
  }
  const auto taps = rrc_taps(chain.rrc_rolloff, chain.rrc_span_symbols, chain.samples_per_symbol);
  circular_filter(s.x, taps);
  circular_filter(s.y, taps);
  return s;
}

double bessel5_amplitude(double f_hz, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  // Reverse Bessel polynomial of order 5 on the imaginary axis:
  // theta5(jx) = (15x^4 - 420x^2 + 945) + j(x^5 - 105x^3 + 945x).
  auto magnitude_sq = [](double x) {
    const double x2 = x * x;
    const double re = (15.0 * x2 - 420.0) * x2 + 945.0;
    const double im = x * ((x2 - 105.0) * x2 + 945.0);
    return re * re + im * im;
  };
  // Half-power point of the delay-normalized prototype, solved once; the
  // response is then rescaled so it sits exactly at |f| = bandwidth.
  static const double x3db = [magnitude_sq] {
    double lo = 1.0, hi = 4.0;
    const double target = 2.0 * 945.0 * 945.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (magnitude_sq(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  const double x = std::abs(f_hz) / bandwidth_hz * x3db;
  return 945.0 / std::sqrt(magnitude_sq(x));
}

SignalBlock apply_tx_frontend(SignalBlock s, const TxChain& chain) {
  chain.validate();
  s.validate();
  const std::size_t n = s.size();
  const double bw = chain.bandwidth_hz();
  const double clip_gain = std::pow(10.0, chain.preemphasis_clip_db / 20.0);

  fft::forward(s.x);
  fft::forward(s.y);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft::bin_frequency_hz(k, n, s.sample_rate);
    const double response = bessel5_amplitude(f, bw);
    const double pre = chain.preemphasis_enabled ? std::min(1.0 / response, clip_gain) : 1.0;
    const double g = pre * response;
    s.x[k] *= g;
    s.y[k] *= g;
  }
  fft::inverse(s.x);
  fft::inverse(s.y);

  if (chain.laser_linewidth_hz > 0.0) {
    // Wiener phase walk shared by both polarizations (one laser per block).
    GaussianRng rng(derive_seed(s.seed_tag, 0x6c61736572ull));
    const double sigma =
        std::sqrt(2.0 * std::numbers::pi * chain.laser_linewidth_hz / s.sample_rate);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      phase += sigma * rng.next();
      const cplx rot(std::cos(phase), std::sin(phase));
      s.x[i] *= rot;
      s.y[i] *= rot;
    }
  }
  return s;
}

SignalBlock wdm_multiplex(const std::vector<SignalBlock>& channels, const ChannelGrid& grid) {
  grid.validate();
  if (channels.size() != grid.count())
    throw std::invalid_argument("channel count does not match the grid");
  for (const auto& ch : channels) {
    ch.validate();
    if (ch.size() != channels.front().size() || ch.sample_rate != channels.front().sample_rate)
      throw std::invalid_argument("channels must share length and sample rate");
  }
  const double band = std::abs(grid.offset_hz(grid.count() - 1) - grid.offset_hz(0)) +
                      grid.channel_spacing_hz;
  if (band > channels.front().sample_rate)
    throw std::invalid_argument("insufficient simulation bandwidth");

  SignalBlock out(channels.front().size(), channels.front().sample_rate, grid.grid_center_hz(),
                  channels.front().seed_tag);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    SignalBlock ch = frequency_shift(set_power_dbm(channels[i], 0.0), grid.offset_hz(i));
    for (std::size_t k = 0; k < out.size(); ++k) {
      out.x[k] += ch.x[k];
      out.y[k] += ch.y[k];
    }
  }
  return out;
}

}  // namespace hcfloop
