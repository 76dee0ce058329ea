#include "hcfloop/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace hcfloop::fft {
namespace {

// FFTW planning is not thread safe, so plans are created and cached under a
// lock. Execution on distinct buffers is safe concurrently. Plans use
// FFTW_ESTIMATE so planning never touches the caller's data, and
// FFTW_UNALIGNED so one plan serves every std::vector buffer of that size.
std::mutex plan_mutex;
std::map<std::pair<std::size_t, int>, fftw_plan> plan_cache;

fftw_plan plan_for(std::size_t n, int direction) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(n, direction);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  std::vector<std::complex<double>> scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan =
      fftw_plan_dft_1d(static_cast<int>(n), buf, buf, direction, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw std::runtime_error("FFT planning failed for length " + std::to_string(n));
  plan_cache.emplace(key, plan);
  return plan;
}

void execute(std::vector<std::complex<double>>& data, int direction) {
  if (data.empty()) throw std::invalid_argument("FFT of empty buffer");
  fftw_plan plan = plan_for(data.size(), direction);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward(std::vector<std::complex<double>>& data) { execute(data, FFTW_FORWARD); }

void inverse(std::vector<std::complex<double>>& data) {
  execute(data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

double bin_frequency_hz(std::size_t bin, std::size_t n, double sample_rate_hz) {
  if (bin >= n) throw std::out_of_range("FFT bin outside transform");
  auto k = static_cast<long long>(bin);
  auto nn = static_cast<long long>(n);
  if (k > nn / 2) k -= nn;  // upper half aliases to negative frequencies
  return static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
}

}  // namespace hcfloop::fft
