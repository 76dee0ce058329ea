#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <vector>

#include "hcfloop/constellation.hpp"

// Reference bit-metric-decoding rate for Gray-labelled square QAM with
// factorized priors, computed by numerical integration over one PAM rail.
// Serves as an independent check of the Monte-Carlo estimator. The 2D rate of
// a product constellation is twice the 1D rail rate at half the noise
// variance.
namespace oracle {

struct PamRail {
  std::vector<double> levels;  // ascending
  std::vector<double> probs;   // marginal prior per level
};

inline PamRail marginal_rail(const hcfloop::ShapedConstellation& c) {
  std::map<long long, std::pair<double, double>> acc;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto key = std::llround(c.points[i].real() * 1e9);
    auto it = acc.find(key);
    if (it == acc.end())
      acc.emplace(key, std::pair{c.points[i].real(), c.probabilities[i]});
    else
      it->second.second += c.probabilities[i];
  }
  PamRail rail;
  for (const auto& [key, lp] : acc) {
    rail.levels.push_back(lp.first);
    rail.probs.push_back(lp.second);
  }
  return rail;
}

// Rate of one rail under a real Gaussian channel with variance sigma2_1d,
// bits labelled by the binary-reflected Gray code on the ascending levels.
inline double pam_bmd_rate(const PamRail& rail, double sigma2_1d) {
  const std::size_t levels = rail.levels.size();
  std::size_t bits = 0;
  while ((1u << bits) < levels) ++bits;

  double entropy = 0.0;
  for (double p : rail.probs)
    if (p > 0.0) entropy -= p * std::log2(p);

  const double sigma = std::sqrt(sigma2_1d);
  const double lo = rail.levels.front() - 12.0 * sigma;
  const double hi = rail.levels.back() + 12.0 * sigma;
  const std::size_t steps = 20000;
  const double dy = (hi - lo) / static_cast<double>(steps);
  const double norm = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * sigma2_1d);

  std::vector<std::size_t> label(levels);
  for (std::size_t l = 0; l < levels; ++l) label[l] = l ^ (l >> 1);

  double mismatch = 0.0;  // sum over bits of E[log2 P(B_k | Y)]
  std::vector<double> w(levels);
  for (std::size_t step = 0; step <= steps; ++step) {
    const double y = lo + dy * static_cast<double>(step);
    double den = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
      const double d = y - rail.levels[l];
      w[l] = rail.probs[l] * std::exp(-d * d / (2.0 * sigma2_1d));
      den += w[l];
    }
    if (den <= 0.0) continue;
    double cell = 0.0;
    for (std::size_t k = 0; k < bits; ++k) {
      double num[2] = {0.0, 0.0};
      for (std::size_t l = 0; l < levels; ++l) num[(label[l] >> k) & 1u] += w[l];
      for (int b = 0; b < 2; ++b)
        if (num[b] > 0.0) cell += num[b] * std::log2(num[b] / den);
    }
    const double weight = (step == 0 || step == steps) ? 0.5 : 1.0;
    mismatch += weight * cell * norm * dy;
  }
  return entropy + mismatch;
}

// Dual-quadrature rate at a complex-noise SNR (signal energy 1, noise
// variance split evenly between the quadratures).
inline double qam_bmd_rate(const hcfloop::ShapedConstellation& c, double snr_db) {
  const double sigma2 = std::pow(10.0, -snr_db / 10.0);
  return 2.0 * pam_bmd_rate(marginal_rail(c), sigma2 / 2.0);
}

}  // namespace oracle
