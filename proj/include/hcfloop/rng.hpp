#pragma once

#include <cmath>
#include <cstdint>

namespace hcfloop {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic seed derivation for (run, loop, stage, ...) style streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = base ^ 0xA5A5A5A55A5A5A5AULL;
  splitmix64(s);
  s ^= a * 0xFF51AFD7ED558CCDULL + 1;
  splitmix64(s);
  s ^= b * 0xC4CEB9FE1A85EC53ULL + 1;
  splitmix64(s);
  s ^= c * 0x9E3779B97F4A7C15ULL + 1;
  return splitmix64(s);
}

// Self-contained Gaussian source (Box-Muller over splitmix64) so noise streams
// do not depend on the C++ library's distribution internals.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : s_(seed) {}

  double uniform() {  // strictly inside (0,1)
    const std::uint64_t r = splitmix64(s_) >> 11;
    return (static_cast<double>(r) + 0.5) * 0x1.0p-53;
  }

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t s_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hcfloop
