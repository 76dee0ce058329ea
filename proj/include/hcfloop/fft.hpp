#pragma once

#include <complex>
#include <vector>

namespace hcfloop::fft {

// In-place complex FFTs backed by FFTW (plans cached per size, thread-safe).
// forward is unscaled, inverse carries the 1/N factor.
void forward(std::vector<std::complex<double>>& data);
void inverse(std::vector<std::complex<double>>& data);

// Signed bin frequency in Hz for an n-point transform at sample rate fs:
// bins [0, n/2) map to [0, fs/2), bins [n/2, n) to [-fs/2, 0).
double bin_frequency_hz(std::size_t bin, std::size_t n, double fs);

}  // namespace hcfloop::fft
