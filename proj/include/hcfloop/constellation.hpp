#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace hcfloop {

// Probabilistically shaped square-QAM source distribution. Points carry unit
// mean energy under the shaping probabilities.
struct ShapedConstellation {
  std::vector<std::complex<double>> points;
  std::vector<double> probabilities;
  double entropy_bits = 0.0;
  int base_order = 0;

  void validate() const;
};

// Maxwell-Boltzmann shaping p_i ~ exp(-nu*|c_i|^2) over a square QAM grid.
// nu is found by monotone bisection so the source entropy matches
// target_entropy_bits within 1e-6 bit. target must lie in (0, log2(order)].
ShapedConstellation mb_shape_constellation(double target_entropy_bits, int base_order = 64);

// i.i.d. sampling from the shaped distribution via inverse CDF; deterministic
// for a given seed.
std::vector<std::complex<double>> draw_shaped_symbols(const ShapedConstellation& c,
                                                      std::size_t count, std::uint64_t seed);

// Plug-in entropy of a drawn symbol stream (symbols must be constellation points).
double empirical_entropy_bits(const ShapedConstellation& c,
                              const std::vector<std::complex<double>>& symbols);

// Index of the constellation point a symbol was drawn from (nearest point).
std::size_t nearest_point_index(const ShapedConstellation& c, std::complex<double> symbol);

// Text export: one "index  I  Q  probability" row per point.
void write_constellation_table(const ShapedConstellation& c, const std::string& path);

}  // namespace hcfloop
