#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace hcfloop {

using cplx = std::complex<double>;

namespace constants {
inline constexpr double speed_of_light_mps = 299792458.0;
inline constexpr double planck_js = 6.62607015e-34;
inline constexpr double default_wavelength_nm = 1559.39;
inline constexpr double osnr_reference_bandwidth_hz = 12.5e9;
}  // namespace constants

double wavelength_nm_to_hz(double nm);
double hz_to_wavelength_nm(double hz);

// Dual-polarization sampled optical field at complex baseband.
// |x[n]|^2 + |y[n]|^2 is the instantaneous power in watts; time runs from 0 at
// the first sample. Group delay is bookkept by the propagation layer and never
// realized as a sample shift.
struct SignalBlock {
  std::vector<cplx> x;
  std::vector<cplx> y;
  double sample_rate = 0.0;       // Hz
  double center_frequency = 0.0;  // Hz, absolute optical carrier
  std::uint64_t seed_tag = 0;     // provenance of the randomness behind this block

  SignalBlock() = default;
  SignalBlock(std::vector<cplx> sx, std::vector<cplx> sy, double fs, double fc,
              std::uint64_t tag = 0);
  SignalBlock(std::size_t n, double fs, double fc, std::uint64_t tag = 0);

  std::size_t size() const { return x.size(); }
  double duration_s() const { return static_cast<double>(x.size()) / sample_rate; }

  void validate() const;  // throws std::invalid_argument on a broken invariant
};

// WDM channel plan. Wavelengths are stored ascending; channel spacing is
// uniform in frequency.
struct ChannelGrid {
  std::vector<double> center_wavelength_nm;
  double channel_spacing_hz = 0.0;

  std::size_t count() const { return center_wavelength_nm.size(); }
  std::size_t center_index() const { return count() / 2; }
  double frequency_hz(std::size_t i) const;
  double grid_center_hz() const;                 // frequency of the middle channel
  double offset_hz(std::size_t i) const;         // frequency_hz(i) - grid_center_hz()
  void validate() const;
};

ChannelGrid make_grid(double center_wavelength_nm, double spacing_hz, std::size_t count);

double measure_power_dbm(const SignalBlock& s);
SignalBlock set_power_dbm(SignalBlock s, double target_dbm);

// Multiplies by exp(i*2*pi*offset*t); energy is preserved exactly.
SignalBlock frequency_shift(SignalBlock s, double offset_hz);

// Power inside one grid channel's passband (width = channel spacing), both
// polarizations, relative to the signal's own center frequency.
double channel_power_dbm(const SignalBlock& s, const ChannelGrid& grid, std::size_t index);

// Binary sample dump: little-endian header {magic "HLSB", u32 version, u64
// sample count, f64 sample_rate, f64 center_frequency} followed by interleaved
// f64 quads (Ix, Qx, Iy, Qy).
void write_signal_dump(const SignalBlock& s, const std::string& path);
SignalBlock read_signal_dump(const std::string& path);

}  // namespace hcfloop
