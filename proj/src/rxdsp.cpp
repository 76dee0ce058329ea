#include "hcfloop/rxdsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hcfloop/fft.hpp"

namespace hcfloop {

void DspConfig::validate() const {
  if (eq_taps < 3 || eq_taps % 2 == 0)
    throw std::invalid_argument("equalizer taps must be odd and >= 3");
  if (!(eq_step > 0.0) || eq_step > 0.1)
    throw std::invalid_argument("equalizer step outside (0, 0.1]");
  if (eq_passes < 1) throw std::invalid_argument("at least one training pass required");
  if (cpe_block < 8) throw std::invalid_argument("phase recovery block below 8 symbols");
  if (prefix_symbols < 0) throw std::invalid_argument("negative prefix length");
  if (!std::isfinite(total_dispersion_ps_per_nm))
    throw std::invalid_argument("total dispersion must be finite");
}

SignalBlock select_channel(SignalBlock s, const ChannelGrid& grid, std::size_t index) {
  s.validate();
  grid.validate();
  if (index >= grid.count()) throw std::out_of_range("channel index outside grid");
  const double off = grid.offset_hz(index);
  const double half = grid.channel_spacing_hz / 2.0;

  fft::forward(s.x);
  fft::forward(s.y);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = fft::bin_frequency_hz(k, s.size(), s.sample_rate);
    if (std::abs(f - off) >= half) {
      s.x[k] = 0.0;
      s.y[k] = 0.0;
    }
  }
  fft::inverse(s.x);
  fft::inverse(s.y);
  s = frequency_shift(std::move(s), -off);
  s.center_frequency = grid.frequency_hz(index);
  return s;
}

SignalBlock cd_compensate(SignalBlock s, double total_dispersion_ps_per_nm) {
  s.validate();
  if (!std::isfinite(total_dispersion_ps_per_nm))
    throw std::invalid_argument("total dispersion must be finite");
  if (total_dispersion_ps_per_nm == 0.0) return s;

  const double lambda_m = constants::speed_of_light_mps / s.center_frequency;
  const double d_total_si = total_dispersion_ps_per_nm * 1e-3;  // s/m
  const double beta2_l = -d_total_si * lambda_m * lambda_m /
                         (2.0 * std::numbers::pi * constants::speed_of_light_mps);  // s^2

  fft::forward(s.x);
  fft::forward(s.y);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double omega = 2.0 * std::numbers::pi * fft::bin_frequency_hz(k, s.size(), s.sample_rate);
    const double ph = -0.5 * beta2_l * omega * omega;
    const cplx rot(std::cos(ph), std::sin(ph));
    s.x[k] *= rot;
    s.y[k] *= rot;
  }
  fft::inverse(s.x);
  fft::inverse(s.y);
  return s;
}

namespace {

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

// Circular cross-correlation q[d] = sum_n a[n+d] * conj(b[n]).
std::vector<cplx> cross_correlate(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  auto fa = a;
  auto fb = b;
  fft::forward(fa);
  fft::forward(fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= std::conj(fb[k]);
  fft::inverse(fa);
  return fa;
}

}  // namespace

TimingResult matched_filter_downsample(const SignalBlock& s, const TxChain& chain,
                                       const std::vector<cplx>& prefix_x,
                                       const std::vector<cplx>& prefix_y) {
  s.validate();
  chain.validate();
  if (prefix_x.size() != prefix_y.size() || prefix_x.empty())
    throw std::invalid_argument("prefix rails empty or mismatched");

  const double ratio = s.sample_rate / chain.symbol_rate;
  const auto sps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(sps)) > 1e-9 || sps < 2 || sps % 2 != 0)
    throw std::invalid_argument("sample rate must be an even integer multiple of the symbol rate");
  const std::size_t n = s.size();
  if (n % sps != 0) throw std::invalid_argument("block does not hold whole symbols");
  const std::size_t n_sym = n / sps;
  if (prefix_x.size() > n_sym) throw std::invalid_argument("prefix longer than the block");

  SignalBlock mf = s;
  const auto taps = rrc_taps(chain.rrc_rolloff, chain.rrc_span_symbols, chain.samples_per_symbol);
  circular_filter(mf.x, taps);
  circular_filter(mf.y, taps);

  // Timing by correlation against the zero-stuffed prefix train, summed over
  // all four polarization pairings so rotation cannot hide the peak.
  std::vector<cplx> ref_x(n, cplx{0.0, 0.0});
  std::vector<cplx> ref_y(n, cplx{0.0, 0.0});
  std::vector<cplx> window(n, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < prefix_x.size(); ++k) {
    ref_x[k * sps] = prefix_x[k];
    ref_y[k * sps] = prefix_y[k];
    window[k * sps] = 1.0;
  }

  const auto cxx = cross_correlate(mf.x, ref_x);
  const auto cxy = cross_correlate(mf.x, ref_y);
  const auto cyx = cross_correlate(mf.y, ref_x);
  const auto cyy = cross_correlate(mf.y, ref_y);

  std::vector<cplx> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = std::norm(mf.x[i]) + std::norm(mf.y[i]);
  const auto strided_energy = cross_correlate(sq, window);

  double ref_energy = 0.0;
  for (std::size_t k = 0; k < prefix_x.size(); ++k)
    ref_energy += std::norm(prefix_x[k]) + std::norm(prefix_y[k]);

  std::size_t best = 0;
  double best_metric = -1.0;
  for (std::size_t d = 0; d < n; ++d) {
    const double m = std::norm(cxx[d]) + std::norm(cxy[d]) + std::norm(cyx[d]) + std::norm(cyy[d]);
    if (m > best_metric) {
      best_metric = m;
      best = d;
    }
  }
  const double window_energy = std::max(strided_energy[best].real(), 1e-300);
  const double ratio_norm = std::sqrt(best_metric / (window_energy * ref_energy));
  if (!(ratio_norm >= 0.15)) throw std::runtime_error("sync failed");

  TimingResult out;
  out.sample_offset = static_cast<long>(best);
  out.corr_ratio = ratio_norm;
  out.at2sps.x.resize(2 * n_sym);
  out.at2sps.y.resize(2 * n_sym);
  const std::size_t half_sps = sps / 2;
  for (std::size_t k = 0; k < 2 * n_sym; ++k) {
    const std::size_t idx = (best + k * half_sps) % n;
    out.at2sps.x[k] = mf.x[idx];
    out.at2sps.y[k] = mf.y[idx];
  }
  return out;
}

SymbolStream equalize_2x2(const SymbolStream& in2sps, const std::vector<cplx>& known_x,
                          const std::vector<cplx>& known_y, const DspConfig& dsp) {
  dsp.validate();
  const std::size_t n2 = in2sps.x.size();
  if (n2 != in2sps.y.size() || n2 == 0) throw std::invalid_argument("input rails mismatched");
  const std::size_t n_sym = n2 / 2;
  if (n2 % 2 != 0 || known_x.size() != n_sym || known_y.size() != n_sym)
    throw std::invalid_argument("training symbols do not match the input length");

  // Unit average power per rail keeps the fixed LMS step well conditioned.
  double power = 0.0;
  for (std::size_t i = 0; i < n2; ++i) power += std::norm(in2sps.x[i]) + std::norm(in2sps.y[i]);
  power /= static_cast<double>(2 * n2);
  if (!(power > 0.0)) throw std::invalid_argument("zero power equalizer input");
  const double inv = 1.0 / std::sqrt(power);
  std::vector<cplx> ux(n2), uy(n2);
  for (std::size_t i = 0; i < n2; ++i) {
    ux[i] = in2sps.x[i] * inv;
    uy[i] = in2sps.y[i] * inv;
  }

  const auto taps = static_cast<std::size_t>(dsp.eq_taps);
  const std::size_t center = taps / 2;
  std::vector<cplx> hxx(taps), hxy(taps), hyx(taps), hyy(taps);
  hxx[center] = 1.0;
  hyy[center] = 1.0;

  auto filter_at = [&](std::size_t k, cplx& ox, cplx& oy) {
    ox = 0.0;
    oy = 0.0;
    for (std::size_t m = 0; m < taps; ++m) {
      const std::size_t idx = (2 * k + n2 + m - center) % n2;
      ox += hxx[m] * ux[idx] + hxy[m] * uy[idx];
      oy += hyx[m] * ux[idx] + hyy[m] * uy[idx];
    }
  };

  for (int pass = 0; pass < dsp.eq_passes; ++pass) {
    for (std::size_t k = 0; k < n_sym; ++k) {
      cplx ox, oy;
      filter_at(k, ox, oy);
      const cplx ex = known_x[k] - ox;
      const cplx ey = known_y[k] - oy;
      for (std::size_t m = 0; m < taps; ++m) {
        const std::size_t idx = (2 * k + n2 + m - center) % n2;
        const cplx cux = std::conj(ux[idx]);
        const cplx cuy = std::conj(uy[idx]);
        hxx[m] += dsp.eq_step * ex * cux;
        hxy[m] += dsp.eq_step * ex * cuy;
        hyx[m] += dsp.eq_step * ey * cux;
        hyy[m] += dsp.eq_step * ey * cuy;
      }
    }
  }

  SymbolStream out;
  out.x.resize(n_sym);
  out.y.resize(n_sym);
  double mse = 0.0;
  for (std::size_t k = 0; k < n_sym; ++k) {
    cplx ox, oy;
    filter_at(k, ox, oy);
    out.x[k] = ox;
    out.y[k] = oy;
    mse += std::norm(known_x[k] - ox) + std::norm(known_y[k] - oy);
  }
  mse /= static_cast<double>(2 * n_sym);
  if (!std::isfinite(mse) || mse > 4.0) throw std::runtime_error("equalizer diverged");
  return out;
}

CpeResult carrier_phase_recover(const SymbolStream& in, const std::vector<cplx>& known_x,
                                const std::vector<cplx>& known_y, int block_symbols) {
  if (block_symbols < 8) throw std::invalid_argument("phase recovery block below 8 symbols");
  const std::size_t n = in.x.size();
  if (n != in.y.size() || n == 0) throw std::invalid_argument("input rails mismatched");
  if (known_x.size() != n || known_y.size() != n)
    throw std::invalid_argument("reference symbols do not match the input length");

  CpeResult res;
  res.out.x.resize(n);
  res.out.y.resize(n);
  const auto block = static_cast<std::size_t>(block_symbols);
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t end = std::min(start + block, n);
    cplx acc_x = 0.0, acc_y = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      acc_x += in.x[k] * std::conj(known_x[k]);
      acc_y += in.y[k] * std::conj(known_y[k]);
    }
    const double px = std::arg(acc_x);
    const double py = std::arg(acc_y);
    const cplx rx(std::cos(px), -std::sin(px));
    const cplx ry(std::cos(py), -std::sin(py));
    for (std::size_t k = start; k < end; ++k) {
      res.out.x[k] = in.x[k] * rx;
      res.out.y[k] = in.y[k] * ry;
    }
    res.phase_x.push_back(px);
    res.phase_y.push_back(py);
  }
  return res;
}

}  // namespace hcfloop
