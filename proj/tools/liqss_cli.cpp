// Batch front-end: run the Euler reference, run the LIQSS solver, compare the
// two, or sweep the quantum size; results land as CSV files in the output
// directory.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 sweep completed with failed rows.

#include "liqss/analysis.hpp"
#include "liqss/config.hpp"
#include "liqss/csv.hpp"
#include "liqss/machine.hpp"
#include "liqss/qss.hpp"
#include "liqss/reference.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace liqss;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  double t_end = 0.0;
  double dq = 0.0;
  double dq_speed = 0.0;
  bool dump = false;
};

RunConfig effective_config(const CommonFlags& flags) {
  RunConfig cfg = flags.config_path.empty() ? default_config() : load_config(flags.config_path);
  if (!flags.out_dir.empty()) {
    cfg.out_dir = flags.out_dir;
  }
  if (flags.t_end > 0.0) {
    cfg.t_end = flags.t_end;
  }
  if (flags.dq > 0.0) {
    cfg.quanta.flux_dq = flags.dq;
    cfg.quanta.angle_dq = flags.dq;
    cfg.quanta.speed_dq = flags.dq / 10.0;
  }
  if (flags.dq_speed > 0.0) {
    cfg.quanta.speed_dq = flags.dq_speed;
  }
  return cfg;
}

int sweep_threads() {
  if (const char* env = std::getenv("LIQSS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      return n;
    }
  }
  return 0;  // auto
}

SampleGrid resample_grid(const RunConfig& cfg) {
  const auto count = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.resample_dt)) + 1;
  return {0.0, cfg.resample_dt, count};
}

int cmd_run_reference(const RunConfig& cfg) {
  const DenseTrajectory ref = run_reference_scenario(cfg.scenario());
  write_reference_csv(fs::path(cfg.out_dir) / "reference.csv", ref, state_names());
  std::cout << "reference.csv: " << ref.samples() << " samples\n";
  return 0;
}

int cmd_run_liqss(const RunConfig& cfg) {
  const ScenarioSpec scenario = cfg.scenario();
  MachineSetup setup = make_setup(scenario);
  Simulator<MachineModel> sim(setup.model, setup.atoms, setup.graph, setup.inputs);
  RecordingSink recorder(kNumStates);
  const RunResult result = sim.run(scenario.t_end, &recorder);

  const fs::path dir(cfg.out_dir);
  const auto& names = state_names();
  for (int i = 0; i < kNumStates; ++i) {
    write_events_csv(dir / ("liqss_events_" + names[static_cast<std::size_t>(i)] + ".csv"),
                     recorder.trajectories()[static_cast<std::size_t>(i)]);
  }
  const ResampledSeries resampled = resample(recorder.trajectories(), resample_grid(cfg));
  write_resampled_csv(dir / "liqss_resampled.csv", resampled, names);

  std::vector<double> intensity;
  intensity.reserve(result.update_counts.size());
  for (const auto c : result.update_counts) {
    intensity.push_back(update_intensity(c, scenario.t_end));
  }
  write_updates_csv(dir / "updates.csv", names, result.update_counts, intensity);
  std::cout << "total updates: " << result.total_updates << "\n";
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  const ScenarioSpec scenario = cfg.scenario();
  const DenseTrajectory ref = run_reference_scenario(scenario);

  MachineSetup setup = make_setup(scenario);
  Simulator<MachineModel> sim(setup.model, setup.atoms, setup.graph, setup.inputs);
  ResamplingSink resampler(kNumStates, grid_of(ref));
  const RunResult result = sim.run(scenario.t_end, &resampler);

  const ErrorReport report =
      make_error_report(resampler.take(), ref, result.update_counts, scenario.t_end);
  write_error_report_csv(fs::path(cfg.out_dir) / "error_report.csv", state_names(), report);
  std::cout << "max_error=" << format_double(report.max_error)
            << " total_updates=" << report.total_updates << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& dq_list) {
  const ScenarioSpec scenario = cfg.scenario();
  const DenseTrajectory ref = run_reference_scenario(scenario);
  const std::vector<SweepRow> rows = quantum_sweep(scenario, ref, dq_list, sweep_threads());
  write_sweep_csv(fs::path(cfg.out_dir) / "sweep.csv", rows);
  bool any_failed = false;
  for (const auto& row : rows) {
    std::cout << "dq=" << format_double(row.delta_q) << " max_error=" << format_double(row.max_error)
              << " total_updates=" << row.total_updates << (row.failed ? " FAILED" : "") << "\n";
    any_failed = any_failed || row.failed;
  }
  return any_failed ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven LIQSS1 simulation of a synchronous machine on an infinite bus"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  CommonFlags flags;
  app.add_option("--config", flags.config_path, "JSON configuration file");
  app.add_option("--out-dir", flags.out_dir, "output directory (overrides config)");
  app.add_option("--t-end", flags.t_end, "simulation horizon in seconds (overrides config)");
  app.add_option("--dq", flags.dq,
                 "flux/angle quantum; speed quantum becomes one tenth of it unless --dq-speed is given");
  app.add_option("--dq-speed", flags.dq_speed, "rotor-speed quantum");
  app.add_flag("--dump-config", flags.dump, "print the effective configuration and exit");

  auto* sub_reference = app.add_subcommand("run-reference", "fixed-step Euler reference run");
  auto* sub_liqss = app.add_subcommand("run-liqss", "event-driven LIQSS1 run");
  auto* sub_compare = app.add_subcommand("compare", "LIQSS1 vs reference error report");
  auto* sub_sweep = app.add_subcommand("sweep", "error/update tradeoff over quantum sizes");
  std::vector<double> dq_list = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  sub_sweep->add_option("--dq-list", dq_list, "quantum sizes to sweep")->delimiter(',');
  for (auto* sub : {sub_reference, sub_liqss, sub_compare, sub_sweep}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = effective_config(flags);
    if (flags.dump) {
      std::cout << dump_config(cfg);
      return 0;
    }
    if (sub_reference->parsed()) {
      return cmd_run_reference(cfg);
    }
    if (sub_liqss->parsed()) {
      return cmd_run_liqss(cfg);
    }
    if (sub_compare->parsed()) {
      return cmd_compare(cfg);
    }
    if (sub_sweep->parsed()) {
      return cmd_sweep(cfg, dq_list);
    }
    std::cerr << app.help();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
