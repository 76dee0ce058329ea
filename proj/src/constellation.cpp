#include "hcfloop/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "hcfloop/rng.hpp"

namespace hcfloop {
namespace {

// Square QAM lattice with odd integer coordinates in natural (row-major)
// order. Probabilities and normalization are applied on top of this layout.
std::vector<std::complex<double>> square_lattice(int order) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  if (side * side != order || side < 2 || side % 2 != 0)
    throw std::invalid_argument("constellation order must be an even square");
  std::vector<std::complex<double>> points;
  points.reserve(static_cast<std::size_t>(order));
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const double i = static_cast<double>(2 * col - side + 1);
      const double q = static_cast<double>(side - 1 - 2 * row);
      points.emplace_back(i, q);
    }
  }
  return points;
}

double entropy_for_rate(const std::vector<std::complex<double>>& points, double nu,
                        std::vector<double>* probs) {
  double z = 0.0;
  std::vector<double> p(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    p[i] = std::exp(-nu * std::norm(points[i]));
    z += p[i];
  }
  double h = 0.0;
  for (auto& v : p) {
    v /= z;
    if (v > 0.0) h -= v * std::log2(v);
  }
  if (probs) *probs = std::move(p);
  return h;
}

}  // namespace

void ShapedConstellation::validate() const {
  if (points.empty() || points.size() != probabilities.size())
    throw std::invalid_argument("constellation points and probabilities disagree");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative symbol probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities do not sum to 1");
}

ShapedConstellation mb_shape_constellation(double target_entropy_bits, int base_order) {
  const double max_bits = std::log2(static_cast<double>(base_order));
  if (!(target_entropy_bits > 0.0)) throw std::invalid_argument("target entropy must be positive");
  if (target_entropy_bits > max_bits)
    throw std::invalid_argument("entropy exceeds log2(M)");

  auto points = square_lattice(base_order);
  std::vector<double> probs;

  // Entropy decreases monotonically in the rate parameter: nu = 0 gives the
  // uniform distribution (maximum), large nu collapses onto the inner ring.
  double lo = 0.0, hi = 1.0;
  while (entropy_for_rate(points, hi, nullptr) > target_entropy_bits) {
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("shaping rate search diverged");
  }
  double h = entropy_for_rate(points, lo, &probs);
  for (int iter = 0; iter < 200 && std::abs(h - target_entropy_bits) > 1e-9; ++iter) {
    const double mid = 0.5 * (lo + hi);
    h = entropy_for_rate(points, mid, &probs);
    if (h > target_entropy_bits)
      lo = mid;
    else
      hi = mid;
  }
  if (std::abs(h - target_entropy_bits) > 1e-6)
    throw std::runtime_error("shaping rate search did not converge");

  // Unit mean symbol energy under the shaped distribution.
  double mean_energy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) mean_energy += probs[i] * std::norm(points[i]);
  const double scale = 1.0 / std::sqrt(mean_energy);
  for (auto& p : points) p *= scale;

  ShapedConstellation c;
  c.points = std::move(points);
  c.probabilities = std::move(probs);
  c.entropy_bits = h;
  c.base_order = base_order;
  c.validate();
  return c;
}

std::vector<std::complex<double>> draw_shaped_symbols(const ShapedConstellation& c,
                                                      std::size_t count, std::uint64_t seed) {
  c.validate();
  if (count == 0) throw std::invalid_argument("symbol count must be positive");
  std::vector<double> cdf(c.probabilities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += c.probabilities[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  GaussianRng rng(seed);
  std::vector<std::complex<double>> symbols(count);
  for (auto& sym : symbols) {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    sym = c.points[static_cast<std::size_t>(std::distance(cdf.begin(), it))];
  }
  return symbols;
}

double empirical_entropy_bits(const ShapedConstellation& c,
                              const std::vector<std::complex<double>>& symbols) {
  c.validate();
  if (symbols.empty()) throw std::invalid_argument("no symbols to measure");
  std::vector<double> counts(c.points.size(), 0.0);
  for (const auto& sym : symbols) counts[nearest_point_index(c, sym)] += 1.0;
  const auto n = static_cast<double>(symbols.size());
  double h = 0.0;
  for (double cnt : counts) {
    if (cnt > 0.0) {
      const double p = cnt / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

std::size_t nearest_point_index(const ShapedConstellation& c, std::complex<double> symbol) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const double d = std::norm(symbol - c.points[i]);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

void write_constellation_table(const ShapedConstellation& c, const std::string& path) {
  c.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "# index I Q probability\n";
  out.precision(12);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    out << i << ' ' << c.points[i].real() << ' ' << c.points[i].imag() << ' '
        << c.probabilities[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace hcfloop
