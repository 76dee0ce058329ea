#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "hcfloop/constellation.hpp"
#include "hcfloop/loop.hpp"
#include "hcfloop/metrics.hpp"
#include "hcfloop/rng.hpp"
#include "hcfloop/signal.hpp"
#include "hcfloop/txchain.hpp"
#include "support/gmi_oracle.hpp"

using namespace hcfloop;

namespace {

std::vector<cplx> add_awgn(const std::vector<cplx>& clean, double sigma2, std::uint64_t seed) {
  std::vector<cplx> noisy(clean.size());
  GaussianRng rng(seed);
  const double scale = std::sqrt(sigma2 / 2.0);
  for (std::size_t i = 0; i < clean.size(); ++i)
    noisy[i] = clean[i] + cplx{rng.next(), rng.next()} * scale;
  return noisy;
}

}  // namespace

TEST_CASE("SNR estimation recovers a known noise level through gain and rotation") {
  const auto c = mb_shape_constellation(5.7, 64);
  const auto ref_x = draw_shaped_symbols(c, 8192, 1);
  const auto ref_y = draw_shaped_symbols(c, 8192, 2);

  const double snr_db = 20.0;
  const double sigma2 = std::pow(10.0, -snr_db / 10.0);
  auto rx_x = add_awgn(ref_x, sigma2, 3);
  auto rx_y = add_awgn(ref_y, sigma2, 4);
  const cplx gain{0.7, 0.4};
  for (auto& v : rx_x) v *= gain;
  for (auto& v : rx_y) v *= gain;

  const double est = estimate_snr_db(rx_x, rx_y, ref_x, ref_y);
  CHECK(est == doctest::Approx(snr_db).epsilon(0.1 / snr_db));

  auto scaled_x = rx_x;
  auto scaled_y = rx_y;
  for (auto& v : scaled_x) v *= cplx{2.0, 3.0};
  for (auto& v : scaled_y) v *= cplx{2.0, 3.0};
  CHECK(estimate_snr_db(scaled_x, scaled_y, ref_x, ref_y) == doctest::Approx(est).epsilon(1e-9));
}

TEST_CASE("SNR estimation rejects degenerate inputs") {
  std::vector<cplx> a(16, 1.0), b(15, 1.0), zero(16, 0.0), empty;
  CHECK_THROWS_WITH(estimate_snr_db(a, b, a, a), "length mismatch");
  CHECK_THROWS_WITH(estimate_snr_db(empty, empty, empty, empty), "no symbols to compare");
  CHECK_THROWS_WITH(estimate_snr_db(a, a, zero, zero), "reference has no energy");
}

TEST_CASE("noiseless GMI equals the source entropy") {
  for (double h : {6.0, 5.7}) {
    const auto c = mb_shape_constellation(h, 64);
    const auto sx = draw_shaped_symbols(c, 2048, 11);
    const auto sy = draw_shaped_symbols(c, 2048, 12);
    CHECK(estimate_gmi_bits(sx, sy, sx, sy, c) == doctest::Approx(c.entropy_bits).epsilon(1e-9));
  }
}

TEST_CASE("GMI estimation needs a minimum sample count") {
  const auto c = mb_shape_constellation(5.7, 64);
  const auto sx = draw_shaped_symbols(c, 512, 21);
  CHECK_THROWS_WITH(estimate_gmi_bits(sx, sx, sx, sx, c), "insufficient sample size");
}

TEST_CASE("Monte-Carlo GMI tracks the integration oracle for both source laws") {
  for (double h : {6.0, 5.7}) {
    const auto c = mb_shape_constellation(h, 64);
    const auto ref_x = draw_shaped_symbols(c, 16384, 31);
    const auto ref_y = draw_shaped_symbols(c, 16384, 32);
    for (double snr_db : {5.0, 10.0, 13.2, 20.0}) {
      const double sigma2 = std::pow(10.0, -snr_db / 10.0);
      const auto rx_x = add_awgn(ref_x, sigma2, 1000 + static_cast<std::uint64_t>(snr_db * 10));
      const auto rx_y = add_awgn(ref_y, sigma2, 2000 + static_cast<std::uint64_t>(snr_db * 10));
      const double est = estimate_gmi_bits(rx_x, rx_y, ref_x, ref_y, c);
      const double want = oracle::qam_bmd_rate(c, snr_db);
      CAPTURE(h);
      CAPTURE(snr_db);
      CHECK(est == doctest::Approx(want).epsilon(0.02 / want));
    }
  }
}

TEST_CASE("normalized GMI and information rate follow their definitions") {
  const auto c = mb_shape_constellation(5.7, 64);
  CHECK(compute_ngmi(5.7, c) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(compute_ngmi(5.1, c) == doctest::Approx(1.0 - 0.6 / 6.0).epsilon(1e-6));

  CHECK(compute_air_gbps(4.154, 130e9) == doctest::Approx(1080.04).epsilon(1e-12));
  CHECK(compute_air_gbps(3.538, 130e9) == doctest::Approx(919.88).epsilon(1e-12));
  CHECK(compute_air_gbps(4.154, 130e9) / compute_air_gbps(3.538, 130e9) ==
        doctest::Approx(1.1741096664782362).epsilon(1e-12));

  CHECK_THROWS_WITH(compute_air_gbps(-0.1, 130e9), "negative information rate");
  CHECK_THROWS_WITH(compute_air_gbps(4.0, 0.0), "symbol rate must be positive");
}

TEST_CASE("spectral OSNR needs a guard strip to read the noise floor") {
  TxChain chain;
  chain.samples_per_symbol = 4;
  chain.laser_linewidth_hz = 0.0;
  const auto c = mb_shape_constellation(5.7, 64);
  auto s = pulse_shape_rrc(draw_shaped_symbols(c, 16384, 41), draw_shaped_symbols(c, 16384, 42),
                           chain);
  s = set_power_dbm(std::move(s), 0.0);
  const double occupied = (1.0 + chain.rrc_rolloff) * chain.symbol_rate;

  const auto wide = make_grid(1559.39, 25e9, 1);
  const auto loaded = noise_load(s, wide, 0, 24.0, 9);
  CHECK(measure_osnr_db(loaded, wide, 0, occupied) == doctest::Approx(24.0).epsilon(0.01));

  const auto tight = make_grid(1559.39, 17.5e9, 1);
  CHECK_THROWS_WITH(measure_osnr_db(loaded, tight, 0, occupied),
                    "OSNR not measurable spectrally");

  SignalBlock brief(loaded.x, loaded.y, loaded.sample_rate, loaded.center_frequency);
  brief.x.resize(2048);
  brief.y.resize(2048);
  const auto narrow = make_grid(1559.39, 18e9, 1);
  CHECK_THROWS_WITH(measure_osnr_db(brief, narrow, 0, occupied),
                    "OSNR not measurable spectrally");
}

TEST_CASE("latency extraction recovers boundary spacing from markers or spikes") {
  PowerTrace trace;
  trace.sample_interval_s = 1e-6;
  const double per_loop_us = 100.0;
  const int loops = 12;
  trace.power_dbm.assign(static_cast<std::size_t>(per_loop_us * loops) + 2, 10.0);
  for (int k = 1; k <= loops; ++k) {
    const auto m = static_cast<std::size_t>(k * 100);
    trace.power_dbm[m] = 13.0;
    if (m + 1 < trace.power_dbm.size()) trace.power_dbm[m + 1] = 13.0;
    trace.boundary_markers.push_back(m);
  }

  const auto report = extract_latency(trace, 2.0, 90.0);
  CHECK(report.per_loop_delay_us == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(report.per_km_latency_us == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(report.total_duration_us == doctest::Approx(1200.0).epsilon(1e-9));
  CHECK_FALSE(report.jitter_warning);

  auto unmarked = trace;
  unmarked.boundary_markers.clear();
  const auto detected = extract_latency(unmarked, 2.0, 90.0);
  CHECK(detected.per_loop_delay_us == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(detected.per_km_latency_us == doctest::Approx(5.0).epsilon(1e-9));

  auto jittered = trace;
  jittered.boundary_markers[5] += 4;
  const auto wobbly = extract_latency(jittered, 2.0, 90.0);
  CHECK(wobbly.jitter_warning);

  PowerTrace flat;
  flat.sample_interval_s = 1e-6;
  flat.power_dbm.assign(64, 10.0);
  CHECK_THROWS_WITH(extract_latency(flat, 2.0, 90.0), "insufficient markers");
}

TEST_CASE("the latency differential subtracts per-km figures") {
  LatencyReport a, b;
  a.per_km_latency_us = 3.34;
  b.per_km_latency_us = 4.90;
  CHECK(latency_differential_us_per_km(b, a) == doctest::Approx(1.56).epsilon(1e-12));
}
