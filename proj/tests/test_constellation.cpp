#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "doctest.h"
#include "hcfloop/constellation.hpp"

using namespace hcfloop;

TEST_CASE("Maxwell-Boltzmann shaping hits the target entropy at unit energy") {
  const auto c = mb_shape_constellation(5.7, 64);
  REQUIRE(c.points.size() == 64);
  REQUIRE(c.probabilities.size() == 64);
  CHECK(c.base_order == 64);
  CHECK(c.entropy_bits == doctest::Approx(5.7).epsilon(1e-7));

  double total = 0.0, energy = 0.0, entropy = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(c.probabilities[i] > 0.0);
    total += c.probabilities[i];
    energy += c.probabilities[i] * std::norm(c.points[i]);
    entropy -= c.probabilities[i] * std::log2(c.probabilities[i]);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(energy == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(entropy == doctest::Approx(5.7).epsilon(1e-7));
}

TEST_CASE("shaping probabilities depend only on the ring energy") {
  const auto c = mb_shape_constellation(5.2, 64);
  std::map<long long, std::pair<double, double>> rings;
  for (std::size_t i = 0; i < 64; ++i) {
    const auto key = std::llround(std::norm(c.points[i]) * 1e9);
    auto it = rings.find(key);
    if (it == rings.end()) {
      rings.emplace(key, std::pair{c.probabilities[i], c.probabilities[i]});
    } else {
      it->second.first = std::min(it->second.first, c.probabilities[i]);
      it->second.second = std::max(it->second.second, c.probabilities[i]);
    }
  }
  for (const auto& [key, mm] : rings) CHECK(mm.second - mm.first < 1e-12);
}

TEST_CASE("full-entropy target degenerates to uniform 64-QAM") {
  const auto c = mb_shape_constellation(6.0, 64);
  for (double p : c.probabilities) CHECK(p == doctest::Approx(1.0 / 64.0).epsilon(1e-9));
  CHECK(c.entropy_bits == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("shaping rejects impossible targets") {
  CHECK_THROWS_WITH(mb_shape_constellation(6.5, 64), "entropy exceeds log2(M)");
  CHECK_THROWS_WITH(mb_shape_constellation(0.0, 64), "target entropy must be positive");
  CHECK_THROWS_WITH(mb_shape_constellation(4.0, 60), "constellation order must be an even square");
}

TEST_CASE("symbol draws are deterministic constellation points") {
  const auto c = mb_shape_constellation(5.7, 64);
  const auto a = draw_shaped_symbols(c, 2000, 42);
  const auto b = draw_shaped_symbols(c, 2000, 42);
  const auto d = draw_shaped_symbols(c, 2000, 43);
  REQUIRE(a.size() == 2000);
  CHECK(a == b);
  CHECK(a != d);
  for (const auto& sym : a) {
    const auto idx = nearest_point_index(c, sym);
    CHECK(std::abs(sym - c.points[idx]) < 1e-12);
  }
}

TEST_CASE("empirical entropy of a long draw matches the design value") {
  const auto c = mb_shape_constellation(5.7, 64);
  const auto syms = draw_shaped_symbols(c, 1000000, 7);
  CHECK(empirical_entropy_bits(c, syms) == doctest::Approx(5.7).epsilon(0.01 / 5.7));
}

TEST_CASE("constellation table export lists all 64 points") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "hcfloop_constellation_test.txt").string();
  const auto c = mb_shape_constellation(5.7, 64);
  write_constellation_table(c, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  CHECK(rows == 64);
  std::remove(path.c_str());
}
