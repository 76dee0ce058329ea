#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hcfloop/experiment.hpp"
#include "hcfloop/fiber.hpp"
#include "hcfloop/metrics.hpp"

namespace {

void print_latency_line(const std::string& label, const hcfloop::LatencyReport& r) {
  std::printf("%-8s per-loop %9.3f us   total %10.3f us   fibre %7.4f us/km%s\n", label.c_str(),
              r.per_loop_delay_us, r.total_duration_us, r.per_km_latency_us,
              r.jitter_warning ? "   [jitter >1%]" : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recirculating-loop optical transmission simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a configured sweep and write result files");
  std::string config_path;
  std::string out_dir = "out";
  int workers = 1;
  run_cmd->add_option("config", config_path, "INI-style config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (default: out)");
  run_cmd->add_option("--workers", workers, "concurrent sweep workers")->check(CLI::PositiveNumber);

  auto* presets_cmd = app.add_subcommand("presets", "built-in experiment presets");
  auto* list_cmd = presets_cmd->add_subcommand("list", "list preset names");
  presets_cmd->require_subcommand(1);

  auto* lat_cmd = app.add_subcommand("latency-report",
                                     "per-km latency comparison from two monitor traces");
  std::string trace_a, trace_b;
  double fut_km = 0.0;
  double fut_km_b = 0.0;
  double common_us = -1.0;
  lat_cmd->add_option("traceA", trace_a, "monitor trace of the first loop")->required();
  lat_cmd->add_option("traceB", trace_b, "monitor trace of the second loop")->required();
  lat_cmd->add_option("--fut-km", fut_km, "fibre-under-test length in km (trace A)")->required();
  lat_cmd->add_option("--fut-km-b", fut_km_b, "fibre-under-test length for trace B (default: same)");
  lat_cmd->add_option("--common-delay-us", common_us,
                      "shared per-loop delay to subtract (default: buffering fibre + switching)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto cfg = hcfloop::parse_config_file(config_path);
      cfg.validate();
      const auto out = hcfloop::run_sweep(cfg, workers);
      hcfloop::write_results(cfg, out, out_dir);
      int failed = 0;
      for (const auto& r : out.results)
        if (!r.error.empty()) ++failed;
      std::cout << cfg.name << ": " << out.results.size() << " points, " << failed
                << " failed -> " << out_dir << "/results.csv\n";
      for (const auto& r : out.results)
        if (!r.error.empty())
          std::cout << "  " << r.point.fut_kind << " " << r.point.launch_power_dbm << " dBm x"
                    << r.point.n_loops << ": " << r.error << "\n";
      return failed == 0 ? 0 : 2;
    }
    if (list_cmd->parsed()) {
      for (const auto& name : hcfloop::list_presets()) std::cout << name << "\n";
      return 0;
    }
    if (lat_cmd->parsed()) {
      const auto ta = hcfloop::read_trace(trace_a);
      const auto tb = hcfloop::read_trace(trace_b);
      if (common_us < 0.0) {
        const auto buffering = hcfloop::make_fiber_preset("buffering_smf");
        common_us = hcfloop::group_delay_s(buffering) * 1e6 + hcfloop::LoopConfig{}.overhead_delay_us;
      }
      const auto ra = hcfloop::extract_latency(ta, fut_km, common_us);
      const auto rb = hcfloop::extract_latency(tb, fut_km_b > 0.0 ? fut_km_b : fut_km, common_us);
      print_latency_line("traceA", ra);
      print_latency_line("traceB", rb);
      std::printf("differential %7.4f us/km (A - B)\n",
                  hcfloop::latency_differential_us_per_km(ra, rb));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
