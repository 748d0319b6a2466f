#include "liqss/reference.hpp"

namespace liqss {

DenseTrajectory run_reference_scenario(const ScenarioSpec& scenario) {
  const MachineModel model(scenario.params, scenario.grid, scenario.torque);
  const std::vector<double> x0 = model.initial_state();
  return run_reference(model, x0, scenario.t_end, scenario.euler_dt);
}

}  // namespace liqss
