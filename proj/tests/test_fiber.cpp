#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "hcfloop/fiber.hpp"
#include "hcfloop/rng.hpp"
#include "hcfloop/signal.hpp"

using namespace hcfloop;

namespace {

SignalBlock gaussian_pulse(std::size_t n, double fs, double t0_s, double peak_w) {
  SignalBlock s(n, fs, wavelength_nm_to_hz(1559.39));
  const double amp = std::sqrt(peak_w / 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(n) / 2.0) / fs;
    const double env = amp * std::exp(-t * t / (2.0 * t0_s * t0_s));
    s.x[i] = env;
    s.y[i] = env;
  }
  return s;
}

double rms_width_s(const SignalBlock& s) {
  double p = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = std::norm(s.x[i]) + std::norm(s.y[i]);
    const double t = static_cast<double>(i) / s.sample_rate;
    p += w;
    m1 += w * t;
    m2 += w * t * t;
  }
  m1 /= p;
  m2 /= p;
  return std::sqrt(m2 - m1 * m1);
}

double block_energy(const SignalBlock& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) e += std::norm(s.x[i]) + std::norm(s.y[i]);
  return e;
}

double l2_error(const SignalBlock& a, const SignalBlock& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += std::norm(a.x[i] - b.x[i]) + std::norm(a.y[i] - b.y[i]);
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("fibre presets carry the loop's span parameters") {
  const auto hcf = make_fiber_preset("hcf");
  CHECK(hcf.length_km == doctest::Approx(1.085));
  CHECK(hcf.attenuation_db_per_km == doctest::Approx(1.5));
  CHECK(hcf.lumped_loss_db == doctest::Approx(4.07));
  CHECK(hcf.dispersion_ps_nm_km == doctest::Approx(3.0));
  CHECK(hcf.gamma_per_w_km == doctest::Approx(1.3e-4));
  CHECK(hcf.group_index == doctest::Approx(1.0003));
  CHECK(total_loss_db(hcf) == doctest::Approx(5.6975).epsilon(1e-9));

  const auto smf = make_fiber_preset("smf");
  CHECK(smf.length_km == doctest::Approx(1.1));
  CHECK(smf.attenuation_db_per_km == doctest::Approx(0.20));
  CHECK(smf.lumped_loss_db == doctest::Approx(0.0));
  CHECK(smf.dispersion_ps_nm_km == doctest::Approx(17.0));
  CHECK(smf.gamma_per_w_km == doctest::Approx(1.3));
  CHECK(smf.group_index == doctest::Approx(1.4682));
  CHECK(total_loss_db(smf) == doctest::Approx(0.22).epsilon(1e-9));

  const auto buf = make_fiber_preset("buffering_smf");
  CHECK(buf.length_km == doctest::Approx(45.6));
  CHECK(total_loss_db(buf) == doctest::Approx(9.12).epsilon(1e-9));

  CHECK_THROWS_WITH(make_fiber_preset("pof"), "unknown fiber preset 'pof'");
}

TEST_CASE("group delay follows length times group index over c") {
  const auto hcf = make_fiber_preset("hcf");
  const auto buf = make_fiber_preset("buffering_smf");
  CHECK(group_delay_s(hcf) * 1e6 / hcf.length_km == doctest::Approx(3.336642).epsilon(1e-6));
  CHECK(group_delay_s(buf) * 1e6 / buf.length_km == doctest::Approx(4.897388).epsilon(1e-6));
  CHECK(group_delay_s(buf) * 1e6 == doctest::Approx(223.320895).epsilon(1e-6));
}

TEST_CASE("beta2 at the reference wavelength matches the dispersion parameter") {
  const auto smf = make_fiber_preset("smf");
  const double carrier = wavelength_nm_to_hz(1559.39);
  CHECK(beta2_s2_per_km(smf, carrier) == doctest::Approx(-2.194612456e-23).epsilon(1e-6));

  const auto hcf = make_fiber_preset("hcf");
  CHECK(beta2_s2_per_km(hcf, carrier) == doctest::Approx(-3.872845511e-24).epsilon(1e-6));
}

TEST_CASE("pure dispersion broadens a Gaussian pulse by the analytic factor") {
  FiberSpec fiber = make_fiber_preset("smf");
  fiber.length_km = 10.0;
  fiber.attenuation_db_per_km = 0.0;
  fiber.lumped_loss_db = 0.0;
  fiber.gamma_per_w_km = 0.0;

  const double fs = 1.28e12;
  const double t0 = 20e-12;
  const auto in = gaussian_pulse(4096, fs, t0, 1e-3);
  const double e_in = block_energy(in);

  StepControl one_step;
  one_step.mode = StepControl::Mode::fixed;
  one_step.max_step_km = 10.0;
  const auto out = propagate(in, fiber, one_step);

  const double beta2_km = beta2_s2_per_km(fiber, in.center_frequency);
  const double ratio = std::sqrt(1.0 + std::pow(beta2_km * fiber.length_km / (t0 * t0), 2));
  const double sigma_expected = t0 / std::sqrt(2.0) * ratio;
  CHECK(rms_width_s(out) == doctest::Approx(sigma_expected).epsilon(1e-6));
  CHECK(block_energy(out) == doctest::Approx(e_in).epsilon(1e-12));

  StepControl many;
  many.mode = StepControl::Mode::fixed;
  many.max_step_km = 0.5;
  const auto out20 = propagate(in, fiber, many);
  CHECK(l2_error(out, out20) < 1e-9 * std::sqrt(e_in));
}

TEST_CASE("continuous-wave self-phase modulation accumulates (8/9) gamma P L_eff") {
  FiberSpec fiber;
  fiber.length_km = 8.0;
  fiber.gamma_per_w_km = 1.3;
  fiber.group_index = 1.4682;

  const double p_w = 0.1;
  SignalBlock cw(1024, 32e9, wavelength_nm_to_hz(1559.39));
  for (std::size_t i = 0; i < cw.size(); ++i) cw.x[i] = cw.y[i] = std::sqrt(p_w / 2.0);

  StepControl ctl;
  ctl.mode = StepControl::Mode::fixed;
  ctl.max_step_km = 0.25;

  SUBCASE("lossless") {
    const auto out = propagate(cw, fiber, ctl);
    const double phase = std::arg(out.x[10] / cw.x[10]);
    const double expected = 8.0 / 9.0 * 1.3 * p_w * 8.0;
    CHECK(phase == doctest::Approx(std::remainder(expected, 2.0 * 3.14159265358979324))
                       .epsilon(1e-9));
    CHECK(std::arg(out.y[10] / cw.y[10]) == doctest::Approx(phase).epsilon(1e-12));
  }

  SUBCASE("with distributed loss the effective length telescopes exactly") {
    fiber.length_km = 50.0;
    fiber.attenuation_db_per_km = 0.2;
    SignalBlock half = cw;
    for (auto& v : half.x) v *= std::sqrt(0.5);
    for (auto& v : half.y) v *= std::sqrt(0.5);

    const auto out = propagate(half, fiber, ctl);
    const double alpha_nat = 0.2 * std::log(10.0) / 10.0;
    const double l_eff = (1.0 - std::exp(-alpha_nat * 50.0)) / alpha_nat;
    const double expected = 8.0 / 9.0 * 1.3 * 0.05 * l_eff;
    CHECK(std::arg(out.x[5] / half.x[5]) ==
          doctest::Approx(std::remainder(expected, 2.0 * 3.14159265358979324)).epsilon(1e-9));
    CHECK(measure_power_dbm(out) ==
          doctest::Approx(measure_power_dbm(half) - 10.0).epsilon(1e-9));
  }
}

TEST_CASE("lossless nonlinear propagation conserves energy") {
  FiberSpec fiber;
  fiber.length_km = 5.0;
  fiber.dispersion_ps_nm_km = 17.0;
  fiber.gamma_per_w_km = 1.3;

  SignalBlock s(2048, 64e9, wavelength_nm_to_hz(1559.39));
  GaussianRng rng(3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.x[i] = cplx{rng.next(), rng.next()} * 0.01;
    s.y[i] = cplx{rng.next(), rng.next()} * 0.01;
  }

  const double e_in = block_energy(s);
  const auto out = propagate(s, fiber);
  CHECK(block_energy(out) == doctest::Approx(e_in).epsilon(1e-9));
}

TEST_CASE("halving the step size shrinks the splitting error at second order") {
  FiberSpec fiber;
  fiber.length_km = 20.0;
  fiber.dispersion_ps_nm_km = 17.0;
  fiber.gamma_per_w_km = 1.3;

  const double fs = 2e12;
  const auto in = gaussian_pulse(2048, fs, 10e-12, 0.2);

  auto run_with = [&](double step_km) {
    StepControl ctl;
    ctl.mode = StepControl::Mode::fixed;
    ctl.max_step_km = step_km;
    return propagate(in, fiber, ctl);
  };

  const auto reference = run_with(0.05);
  const double err_h = l2_error(run_with(0.8), reference);
  const double err_h2 = l2_error(run_with(0.4), reference);
  CHECK(err_h / err_h2 >= 3.0);
}

TEST_CASE("adaptive stepping honours the peak nonlinear phase bound") {
  FiberSpec fiber;
  fiber.length_km = 12.0;
  fiber.dispersion_ps_nm_km = 17.0;
  fiber.gamma_per_w_km = 1.3;

  const auto in = gaussian_pulse(2048, 2e12, 10e-12, 0.3);

  StepControl ctl;
  ctl.mode = StepControl::Mode::adaptive;
  ctl.max_step_km = 0.5;
  ctl.max_nonlinear_phase_rad = 0.01;

  PropagationLog log;
  propagate(in, fiber, ctl, &log);

  REQUIRE(!log.steps.empty());
  double walked = 0.0;
  for (const auto& rec : log.steps) {
    CHECK(rec.peak_phase_rad <= 0.01 * (1.0 + 1e-9));
    CHECK(rec.step_km <= 0.5 + 1e-12);
    walked += rec.step_km;
  }
  CHECK(walked == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("span loss combines distributed and lumped parts") {
  const auto hcf = make_fiber_preset("hcf");
  auto s = set_power_dbm(gaussian_pulse(2048, 64e9, 100e-12, 1e-3), 13.0);
  const auto out = propagate(s, hcf);
  CHECK(measure_power_dbm(out) == doctest::Approx(13.0 - 5.6975).epsilon(1e-6));
}

TEST_CASE("non-finite samples abort propagation with a position report") {
  FiberSpec fiber = make_fiber_preset("smf");
  auto s = gaussian_pulse(1024, 64e9, 50e-12, 1e-3);
  s.x[3] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK_THROWS_WITH(propagate(s, fiber), doctest::Contains("non-finite field during propagation"));
}

TEST_CASE("wavelength-dependent loss tables interpolate across the band") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "hcfloop_loss_table.txt").string();
  {
    std::ofstream out(path);
    out << "# wavelength_nm loss_db_per_km\n1550.0 0.3\n1560.0 0.1\n";
  }
  const auto table = load_loss_table(path);
  REQUIRE(table.size() == 2);
  CHECK(table[0].first == doctest::Approx(1550.0));
  CHECK(table[1].second == doctest::Approx(0.1));

  FiberSpec fiber;
  fiber.length_km = 10.0;
  fiber.loss_table = table;

  auto s = set_power_dbm(gaussian_pulse(4096, 32e9, 200e-12, 1e-3), 0.0);
  const auto out = propagate(s, fiber);
  const double t = (1559.39 - 1550.0) / 10.0;
  const double expected_db = (0.3 + (0.1 - 0.3) * t) * 10.0;
  CHECK(measure_power_dbm(out) == doctest::Approx(-expected_db).epsilon(1e-2));

  std::remove(path.c_str());
  CHECK_THROWS_WITH(load_loss_table("/nonexistent/table.txt"),
                    doctest::Contains("cannot open loss table"));
}

TEST_CASE("fibre validation rejects unphysical spans") {
  FiberSpec bad;
  bad.length_km = -1.0;
  CHECK_THROWS_WITH(bad.validate(), "negative fiber length");
  bad.length_km = 1.0;
  bad.attenuation_db_per_km = -0.1;
  CHECK_THROWS_WITH(bad.validate(), "negative attenuation");
  bad.attenuation_db_per_km = 0.2;
  bad.gamma_per_w_km = -1.0;
  CHECK_THROWS_WITH(bad.validate(), "negative Kerr coefficient");
  bad.gamma_per_w_km = 1.0;
  bad.group_index = 0.5;
  CHECK_THROWS_WITH(bad.validate(), "group index below 1");
}
