#pragma once

// Synchronous machine / infinite bus reference system in the Park
// synchronous frame: seven states (five flux linkages, rotor speed, rotor
// angle), algebraic winding-current constraints, an ideal grid voltage, and
// a prime-mover torque ramp.

#include "liqss/qss.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace liqss {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum StateIndex : int {
  kPsiDr = 0,   // stator d-axis flux
  kPsiQ = 1,    // stator q-axis flux
  kPsiF = 2,    // field flux
  kPsiD = 3,    // d-axis damper flux
  kPsiQd = 4,   // q-axis damper flux
  kOmegaR = 5,  // rotor electrical speed
  kTheta = 6,   // rotor angle relative to the synchronous frame
};

inline constexpr int kNumStates = 7;

const std::array<std::string, kNumStates>& state_names();
int state_index(const std::string& name);  // -1 when unknown

struct GridSpec {
  double v_ll_rms = 20000.0;  // line-to-line RMS voltage, V
  double f = 50.0;            // grid frequency, Hz

  double omega_b() const { return 2.0 * std::numbers::pi * f; }
  // Peak phase voltage of the balanced three-phase source.
  double peak_phase_voltage() const { return v_ll_rms * std::sqrt(2.0 / 3.0); }
};

struct TorqueProfile {
  double t_start = 15.0;   // s, ramp begins
  double t_end = 20.0;     // s, ramp ends
  double fraction = 0.25;  // final torque as fraction of rated
};

struct MachineParams {
  double R_s = 4.0e-2;   // stator resistance, ohm
  double R_F = 2.8e-3;   // field resistance, ohm
  double R_D = 2.0e-2;   // d damper resistance, ohm
  double R_Q = 2.0e-2;   // q damper resistance, ohm
  double L_md = 6.0e-3;  // d magnetizing inductance, H
  double L_mq = 5.6e-3;  // q magnetizing inductance, H
  double L_L = 5.8e-4;   // stator leakage inductance, H
  double L_F = 5.8e-4;   // field leakage inductance, H
  double L_D = 3.8e-4;   // d damper leakage inductance, H
  double L_Q = 3.8e-4;   // q damper leakage inductance, H
  double J = 2.0e4;      // rotor inertia, kg m^2
  int n = 1;             // pole pairs
  double omega_b = 2.0 * std::numbers::pi * 50.0;  // base electrical frequency, rad/s
  double T_rated = 7.1e5;                          // rated torque, N m
  double e_fd = 0.0;                               // field voltage, set by the initializer
};

struct FluxState {
  double psi_dr = 0.0;
  double psi_q = 0.0;
  double psi_F = 0.0;
  double psi_D = 0.0;
  double psi_Q = 0.0;
};

struct MechState {
  double omega_r = 0.0;
  double theta = 0.0;
};

struct CurrentSolution {
  double i_dr = 0.0;
  double i_qr = 0.0;
  double i_F = 0.0;
  double i_D = 0.0;
  double i_Q = 0.0;
};

struct SteadyState {
  FluxState flux;
  MechState mech;
  double e_fd = 0.0;
};

// Grid voltage in the rotor dq frame. theta = 0 aligns the bus with the
// q-axis so the open-circuit initialization carries zero current.
std::pair<double, double> bus_voltage_dq(double theta, const GridSpec& grid);

// Prime-mover torque: zero, then a linear ramp to fraction * T_rated.
double torque_at(double t, const TorqueProfile& profile, const MachineParams& params);

double angle_derivative(double omega_r, double omega_b);

// Active/reactive power at the terminals; positive P is delivered to the grid.
std::pair<double, double> power_output(double v_d, double v_q, double i_dr, double i_qr);

// Open-circuit synchronous equilibrium: zero stator and damper currents,
// rotor locked to the synchronous frame, field excitation balancing the bus
// voltage. All seven derivatives vanish at the returned state.
SteadyState init_steady_state(const MachineParams& params, const GridSpec& grid);

class MachineModel {
 public:
  MachineModel(const MachineParams& params, const GridSpec& grid, const TorqueProfile& profile);

  int num_states() const { return kNumStates; }
  double deriv(int i, std::span<const double> q, double t) const;

  // Winding currents from flux linkages via the precomputed constant
  // inductance-matrix inverses.
  std::array<double, 3> solve_d_currents(double psi_dr, double psi_F, double psi_D) const;
  std::array<double, 2> solve_q_currents(double psi_q, double psi_Q) const;
  CurrentSolution solve_currents(const FluxState& flux) const;

  std::array<double, 5> flux_derivatives(const FluxState& flux, const MechState& mech, double v_d,
                                         double v_q, const CurrentSolution& currents) const;
  double speed_derivative(const FluxState& flux, const CurrentSolution& currents, double t_m) const;

  std::vector<double> initial_state() const;  // 7-vector from init_steady_state

  const MachineParams& params() const { return params_; }
  const GridSpec& grid() const { return grid_; }
  const TorqueProfile& torque_profile() const { return profile_; }

 private:
  MachineParams params_;
  GridSpec grid_;
  TorqueProfile profile_;
  double v_peak_ = 0.0;
  std::array<std::array<double, 3>, 3> md_inv_{};
  std::array<std::array<double, 2>, 2> mq_inv_{};
};

struct QuantaSpec {
  double flux_dq = 1.0e-4;   // Wb, all five flux atoms
  double speed_dq = 1.0e-5;  // rad/s
  double angle_dq = 2.0e-6;  // rad
  std::map<std::string, double> overrides;  // per-state quantum by name

  double for_state(int i) const;
};

struct ScenarioSpec {
  MachineParams params;
  GridSpec grid;
  TorqueProfile torque;
  QuantaSpec quanta;
  double t_end = 50.0;
  double euler_dt = 1.0e-4;
  double resample_dt = 1.0e-4;
  int torque_steps = 1000;  // exogenous wake-ups spread over the ramp
};

// Everything a simulation run needs: the model (with e_fd resolved), the
// seven atom definitions, the derivative dependency graph, the exogenous
// torque schedule, and the initial state.
struct MachineSetup {
  MachineModel model;
  std::vector<AtomInit> atoms;
  DependencyGraph graph;
  std::vector<InputEvent> inputs;
  std::vector<double> x0;
};

std::vector<AtomInit> build_atoms(std::span<const double> x0, const QuantaSpec& quanta);
DependencyGraph machine_dependency_graph();
std::vector<InputEvent> torque_input_schedule(const TorqueProfile& profile, int steps);

MachineSetup make_setup(const ScenarioSpec& scenario);

// Ratio of slowest to fastest time constant (1/|lambda|) of the numerically
// linearized system at the given state.
double time_constant_ratio(const MachineModel& model, std::span<const double> state, double t);

}  // namespace liqss
