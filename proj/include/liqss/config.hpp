#pragma once

// Run configuration: the machine parameter set, grid, torque profile, quanta,
// and solver settings, persisted as a JSON document.

#include "liqss/machine.hpp"

#include <string>

namespace liqss {

struct RunConfig {
  MachineParams machine;  // e_fd is not configurable; the initializer sets it
  GridSpec grid;
  TorqueProfile torque;
  QuantaSpec quanta;
  double t_end = 50.0;
  double euler_dt = 1.0e-4;
  double resample_dt = 1.0e-4;
  int torque_steps = 1000;
  std::string out_dir = "out";

  ScenarioSpec scenario() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig default_config();

// Both throw ConfigError on malformed documents, unknown keys, or values
// outside their physical ranges.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

std::string dump_config(const RunConfig& config);

}  // namespace liqss
