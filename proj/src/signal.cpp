#include "hcfloop/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "hcfloop/fft.hpp"

namespace hcfloop {

SignalBlock::SignalBlock(std::vector<cplx> sx, std::vector<cplx> sy, double fs, double fc,
                         std::uint64_t tag)
    : x(std::move(sx)), y(std::move(sy)), sample_rate(fs), center_frequency(fc), seed_tag(tag) {}

SignalBlock::SignalBlock(std::size_t n, double fs, double fc, std::uint64_t tag)
    : x(n), y(n), sample_rate(fs), center_frequency(fc), seed_tag(tag) {}

void SignalBlock::validate() const {
  if (x.size() != y.size()) throw std::invalid_argument("polarization rails differ in length");
  if (x.empty()) throw std::invalid_argument("empty signal");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(center_frequency > 0.0)) throw std::invalid_argument("center frequency must be positive");
}

double wavelength_nm_to_hz(double nm) {
  if (!(nm > 0.0)) throw std::invalid_argument("wavelength must be positive");
  return constants::speed_of_light_mps / (nm * 1e-9);
}

double hz_to_wavelength_nm(double hz) {
  if (!(hz > 0.0)) throw std::invalid_argument("frequency must be positive");
  return constants::speed_of_light_mps / hz * 1e9;
}

void ChannelGrid::validate() const {
  if (center_wavelength_nm.empty()) throw std::invalid_argument("empty channel grid");
  if (!(channel_spacing_hz > 0.0)) throw std::invalid_argument("channel spacing must be positive");
  for (std::size_t i = 1; i < center_wavelength_nm.size(); ++i) {
    if (!(center_wavelength_nm[i] > center_wavelength_nm[i - 1]))
      throw std::invalid_argument("grid wavelengths must be strictly ascending");
  }
}

double ChannelGrid::frequency_hz(std::size_t i) const {
  if (i >= count()) throw std::out_of_range("channel index outside grid");
  return wavelength_nm_to_hz(center_wavelength_nm[i]);
}

double ChannelGrid::grid_center_hz() const { return frequency_hz(center_index()); }

double ChannelGrid::offset_hz(std::size_t i) const {
  return frequency_hz(i) - grid_center_hz();
}

ChannelGrid make_grid(double center_wavelength_nm, double spacing_hz, std::size_t count) {
  if (count == 0) throw std::invalid_argument("grid needs at least one channel");
  const double f0 = wavelength_nm_to_hz(center_wavelength_nm);
  ChannelGrid grid;
  grid.channel_spacing_hz = spacing_hz;
  const auto mid = static_cast<long long>(count / 2);
  for (long long i = 0; i < static_cast<long long>(count); ++i) {
    const double f = f0 + static_cast<double>(i - mid) * spacing_hz;
    grid.center_wavelength_nm.push_back(hz_to_wavelength_nm(f));
  }
  std::sort(grid.center_wavelength_nm.begin(), grid.center_wavelength_nm.end());
  grid.validate();
  return grid;
}

double measure_power_dbm(const SignalBlock& s) {
  s.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += std::norm(s.x[i]) + std::norm(s.y[i]);
  const double mean_w = acc / static_cast<double>(s.size());
  if (!(mean_w > 0.0)) throw std::domain_error("zero power signal");
  return 10.0 * std::log10(mean_w) + 30.0;
}

SignalBlock set_power_dbm(SignalBlock s, double target_dbm) {
  const double current = measure_power_dbm(s);
  const double scale = std::pow(10.0, (target_dbm - current) / 20.0);
  for (auto& v : s.x) v *= scale;
  for (auto& v : s.y) v *= scale;
  return s;
}

SignalBlock frequency_shift(SignalBlock s, double offset_hz) {
  s.validate();
  if (offset_hz == 0.0) return s;
  const double w = 2.0 * std::numbers::pi * offset_hz / s.sample_rate;
  // Incremental rotation keeps this O(n) without n trig calls; the phasor is
  // renormalized periodically so its magnitude cannot drift over long blocks.
  cplx rot(1.0, 0.0);
  const cplx step(std::cos(w), std::sin(w));
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.x[i] *= rot;
    s.y[i] *= rot;
    rot *= step;
    if ((i & 4095u) == 4095u) rot /= std::abs(rot);
  }
  return s;
}

double channel_power_dbm(const SignalBlock& s, const ChannelGrid& grid, std::size_t index) {
  s.validate();
  grid.validate();
  if (index >= grid.count()) throw std::out_of_range("channel index outside grid");
  const double lo = grid.offset_hz(index) - grid.channel_spacing_hz / 2.0;
  const double hi = grid.offset_hz(index) + grid.channel_spacing_hz / 2.0;
  auto fx = s.x;
  auto fy = s.y;
  fft::forward(fx);
  fft::forward(fy);
  const auto n = fx.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft::bin_frequency_hz(k, n, s.sample_rate);
    if (f >= lo && f < hi) acc += std::norm(fx[k]) + std::norm(fy[k]);
  }
  // Parseval: mean time-domain power = sum |X|^2 / N^2.
  const double mean_w = acc / (static_cast<double>(n) * static_cast<double>(n));
  if (!(mean_w > 0.0)) throw std::domain_error("zero power in channel band");
  return 10.0 * std::log10(mean_w) + 30.0;
}

namespace {

constexpr char kMagic[4] = {'H', 'L', 'S', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw std::runtime_error("truncated signal dump");
  return value;
}

}  // namespace

void write_signal_dump(const SignalBlock& s, const std::string& path) {
  s.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(s.size()));
  put(out, s.sample_rate);
  put(out, s.center_frequency);
  for (std::size_t i = 0; i < s.size(); ++i) {
    put(out, s.x[i].real());
    put(out, s.x[i].imag());
    put(out, s.y[i].real());
    put(out, s.y[i].imag());
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

SignalBlock read_signal_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + " is not a signal dump");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported signal dump version " + std::to_string(version));
  const auto n = get<std::uint64_t>(in);
  if (n == 0) throw std::runtime_error("signal dump holds no samples");
  const double fs = get<double>(in);
  const double fc = get<double>(in);
  SignalBlock s(static_cast<std::size_t>(n), fs, fc);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double xr = get<double>(in);
    const double xi = get<double>(in);
    const double yr = get<double>(in);
    const double yi = get<double>(in);
    s.x[i] = {xr, xi};
    s.y[i] = {yr, yi};
  }
  s.validate();
  return s;
}

}  // namespace hcfloop
