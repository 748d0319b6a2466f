#include "liqss/machine.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace liqss {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw ConfigError(what);
  }
}

// Closed-form inverse of a symmetric 3x3 matrix.
std::array<std::array<double, 3>, 3> invert3(const std::array<std::array<double, 3>, 3>& m) {
  const double a = m[0][0], b = m[0][1], c = m[0][2];
  const double d = m[1][1], e = m[1][2];
  const double f = m[2][2];
  const double det = a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
  require(std::abs(det) > 1e-30, "d-axis inductance matrix is singular");
  const double s = 1.0 / det;
  std::array<std::array<double, 3>, 3> inv{};
  inv[0][0] = (d * f - e * e) * s;
  inv[0][1] = (c * e - b * f) * s;
  inv[0][2] = (b * e - c * d) * s;
  inv[1][0] = inv[0][1];
  inv[1][1] = (a * f - c * c) * s;
  inv[1][2] = (b * c - a * e) * s;
  inv[2][0] = inv[0][2];
  inv[2][1] = inv[1][2];
  inv[2][2] = (a * d - b * b) * s;
  return inv;
}

}  // namespace

const std::array<std::string, kNumStates>& state_names() {
  static const std::array<std::string, kNumStates> names = {
      "psi_dr", "psi_q", "psi_F", "psi_D", "psi_Q", "omega_r", "theta"};
  return names;
}

int state_index(const std::string& name) {
  const auto& names = state_names();
  for (int i = 0; i < kNumStates; ++i) {
    if (names[static_cast<std::size_t>(i)] == name) {
      return i;
    }
  }
  return -1;
}

std::pair<double, double> bus_voltage_dq(double theta, const GridSpec& grid) {
  const double v_m = grid.peak_phase_voltage();
  return {-v_m * std::sin(theta), v_m * std::cos(theta)};
}

double torque_at(double t, const TorqueProfile& profile, const MachineParams& params) {
  const double t_final = profile.fraction * params.T_rated;
  if (t < profile.t_start) {
    return 0.0;
  }
  if (t >= profile.t_end) {
    return t_final;
  }
  return t_final * (t - profile.t_start) / (profile.t_end - profile.t_start);
}

double angle_derivative(double omega_r, double omega_b) { return omega_r - omega_b; }

std::pair<double, double> power_output(double v_d, double v_q, double i_dr, double i_qr) {
  const double p = 1.5 * (v_d * i_dr + v_q * i_qr);
  const double q = 1.5 * (v_q * i_dr - v_d * i_qr);
  return {p, q};
}

SteadyState init_steady_state(const MachineParams& params, const GridSpec& grid) {
  SteadyState s;
  const double v_m = grid.peak_phase_voltage();
  const double i_f = v_m / params.omega_b / params.L_md;
  // psi_dr and psi_D are the same product so the d-axis solve reproduces
  // i_dr = i_D = 0 to rounding.
  s.flux.psi_dr = params.L_md * i_f;
  s.flux.psi_D = params.L_md * i_f;
  s.flux.psi_F = (params.L_F + params.L_md) * i_f;
  s.flux.psi_q = 0.0;
  s.flux.psi_Q = 0.0;
  s.mech.omega_r = params.omega_b;
  s.mech.theta = 0.0;
  s.e_fd = params.R_F * i_f;
  return s;
}

MachineModel::MachineModel(const MachineParams& params, const GridSpec& grid,
                           const TorqueProfile& profile)
    : params_(params), grid_(grid), profile_(profile) {
  require(params.R_s > 0 && params.R_F > 0 && params.R_D > 0 && params.R_Q > 0,
          "all resistances must be positive");
  require(params.L_md > 0 && params.L_mq > 0 && params.L_L > 0 && params.L_F > 0 &&
              params.L_D > 0 && params.L_Q > 0,
          "all inductances must be positive");
  require(params.J > 0, "rotor inertia must be positive");
  require(params.n >= 1, "pole-pair count must be at least 1");
  require(grid.v_ll_rms > 0 && grid.f > 0, "grid voltage and frequency must be positive");
  require(profile.t_end > profile.t_start && profile.t_start >= 0 && profile.fraction >= 0,
          "torque profile must satisfy t_end > t_start >= 0, fraction >= 0");

  v_peak_ = grid.peak_phase_voltage();
  if (params_.e_fd == 0.0) {
    params_.e_fd = init_steady_state(params_, grid_).e_fd;
  }

  const double lmd = params.L_md;
  const std::array<std::array<double, 3>, 3> md = {{{lmd + params.L_L, lmd, lmd},
                                                    {lmd, params.L_F + lmd, lmd},
                                                    {lmd, lmd, params.L_D + lmd}}};
  // SPD check via leading principal minors.
  const double m1 = md[0][0];
  const double m2 = md[0][0] * md[1][1] - md[0][1] * md[0][1];
  const double m3 = md[0][0] * (md[1][1] * md[2][2] - md[1][2] * md[1][2]) -
                    md[0][1] * (md[0][1] * md[2][2] - md[1][2] * md[0][2]) +
                    md[0][2] * (md[0][1] * md[1][2] - md[1][1] * md[0][2]);
  require(m1 > 0 && m2 > 0 && m3 > 0, "d-axis inductance matrix is not positive definite");
  md_inv_ = invert3(md);

  const double lmq = params.L_mq;
  const double q11 = lmq + params.L_L;
  const double q22 = params.L_Q + lmq;
  const double det_q = q11 * q22 - lmq * lmq;
  require(q11 > 0 && det_q > 0, "q-axis inductance matrix is not positive definite");
  mq_inv_[0][0] = q22 / det_q;
  mq_inv_[0][1] = -lmq / det_q;
  mq_inv_[1][0] = -lmq / det_q;
  mq_inv_[1][1] = q11 / det_q;
}

std::array<double, 3> MachineModel::solve_d_currents(double psi_dr, double psi_F,
                                                     double psi_D) const {
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) {
    out[static_cast<std::size_t>(r)] = md_inv_[static_cast<std::size_t>(r)][0] * psi_dr +
                                       md_inv_[static_cast<std::size_t>(r)][1] * psi_F +
                                       md_inv_[static_cast<std::size_t>(r)][2] * psi_D;
  }
  return out;
}

std::array<double, 2> MachineModel::solve_q_currents(double psi_q, double psi_Q) const {
  return {mq_inv_[0][0] * psi_q + mq_inv_[0][1] * psi_Q,
          mq_inv_[1][0] * psi_q + mq_inv_[1][1] * psi_Q};
}

CurrentSolution MachineModel::solve_currents(const FluxState& flux) const {
  const auto d = solve_d_currents(flux.psi_dr, flux.psi_F, flux.psi_D);
  const auto q = solve_q_currents(flux.psi_q, flux.psi_Q);
  return {d[0], q[0], d[1], d[2], q[1]};
}

std::array<double, 5> MachineModel::flux_derivatives(const FluxState& flux, const MechState& mech,
                                                     double v_d, double v_q,
                                                     const CurrentSolution& currents) const {
  return {v_d - params_.R_s * currents.i_dr + mech.omega_r * flux.psi_q,
          v_q - params_.R_s * currents.i_qr - mech.omega_r * flux.psi_dr,
          params_.e_fd - currents.i_F * params_.R_F,
          -currents.i_D * params_.R_D,
          -currents.i_Q * params_.R_Q};
}

double MachineModel::speed_derivative(const FluxState& flux, const CurrentSolution& currents,
                                      double t_m) const {
  const double t_e = currents.i_qr * flux.psi_dr - currents.i_dr * flux.psi_q;
  return (static_cast<double>(params_.n) / params_.J) * (t_m - t_e);
}

double MachineModel::deriv(int i, std::span<const double> q, double t) const {
  switch (i) {
    case kPsiDr: {
      const double i_dr =
          md_inv_[0][0] * q[kPsiDr] + md_inv_[0][1] * q[kPsiF] + md_inv_[0][2] * q[kPsiD];
      return -v_peak_ * std::sin(q[kTheta]) - params_.R_s * i_dr + q[kOmegaR] * q[kPsiQ];
    }
    case kPsiQ: {
      const double i_qr = mq_inv_[0][0] * q[kPsiQ] + mq_inv_[0][1] * q[kPsiQd];
      return v_peak_ * std::cos(q[kTheta]) - params_.R_s * i_qr - q[kOmegaR] * q[kPsiDr];
    }
    case kPsiF: {
      const double i_f =
          md_inv_[1][0] * q[kPsiDr] + md_inv_[1][1] * q[kPsiF] + md_inv_[1][2] * q[kPsiD];
      return params_.e_fd - i_f * params_.R_F;
    }
    case kPsiD: {
      const double i_d =
          md_inv_[2][0] * q[kPsiDr] + md_inv_[2][1] * q[kPsiF] + md_inv_[2][2] * q[kPsiD];
      return -i_d * params_.R_D;
    }
    case kPsiQd: {
      const double i_q = mq_inv_[1][0] * q[kPsiQ] + mq_inv_[1][1] * q[kPsiQd];
      return -i_q * params_.R_Q;
    }
    case kOmegaR: {
      const double i_dr =
          md_inv_[0][0] * q[kPsiDr] + md_inv_[0][1] * q[kPsiF] + md_inv_[0][2] * q[kPsiD];
      const double i_qr = mq_inv_[0][0] * q[kPsiQ] + mq_inv_[0][1] * q[kPsiQd];
      const double t_e = i_qr * q[kPsiDr] - i_dr * q[kPsiQ];
      return (static_cast<double>(params_.n) / params_.J) *
             (torque_at(t, profile_, params_) - t_e);
    }
    case kTheta:
      return q[kOmegaR] - params_.omega_b;
    default:
      throw std::out_of_range("state index out of range");
  }
}

std::vector<double> MachineModel::initial_state() const {
  const SteadyState s = init_steady_state(params_, grid_);
  return {s.flux.psi_dr, s.flux.psi_q, s.flux.psi_F, s.flux.psi_D,
          s.flux.psi_Q,  s.mech.omega_r, s.mech.theta};
}

double QuantaSpec::for_state(int i) const {
  double dq = flux_dq;
  if (i == kOmegaR) {
    dq = speed_dq;
  } else if (i == kTheta) {
    dq = angle_dq;
  }
  const auto it = overrides.find(state_names()[static_cast<std::size_t>(i)]);
  if (it != overrides.end()) {
    dq = it->second;
  }
  return dq;
}

std::vector<AtomInit> build_atoms(std::span<const double> x0, const QuantaSpec& quanta) {
  std::vector<AtomInit> atoms;
  atoms.reserve(kNumStates);
  for (int i = 0; i < kNumStates; ++i) {
    const double dq = quanta.for_state(i);
    if (!(dq > 0.0)) {
      throw ConfigError("quantum must be positive for state " +
                        state_names()[static_cast<std::size_t>(i)]);
    }
    atoms.push_back({state_names()[static_cast<std::size_t>(i)], x0[static_cast<std::size_t>(i)], dq});
  }
  return atoms;
}

DependencyGraph machine_dependency_graph() {
  // dependents[i] = atoms whose derivative reads q_i, from the equation
  // structure (current solves couple the axis fluxes; the bus voltage couples
  // theta into both stator equations).
  DependencyGraph g;
  g.dependents.resize(kNumStates);
  g.dependents[kPsiDr] = {kPsiQ, kPsiF, kPsiD, kOmegaR};
  g.dependents[kPsiQ] = {kPsiDr, kPsiQd, kOmegaR};
  g.dependents[kPsiF] = {kPsiDr, kPsiD, kOmegaR};
  g.dependents[kPsiD] = {kPsiDr, kPsiF, kOmegaR};
  g.dependents[kPsiQd] = {kPsiQ, kOmegaR};
  g.dependents[kOmegaR] = {kPsiDr, kPsiQ, kTheta};
  g.dependents[kTheta] = {kPsiDr, kPsiQ};
  return g;
}

std::vector<InputEvent> torque_input_schedule(const TorqueProfile& profile, int steps) {
  std::vector<InputEvent> events;
  if (steps < 1) {
    steps = 1;
  }
  events.reserve(static_cast<std::size_t>(steps) + 1);
  const double span = profile.t_end - profile.t_start;
  for (int k = 0; k <= steps; ++k) {
    const double t = profile.t_start + span * static_cast<double>(k) / static_cast<double>(steps);
    events.push_back({t, {kOmegaR}});
  }
  return events;
}

MachineSetup make_setup(const ScenarioSpec& scenario) {
  MachineModel model(scenario.params, scenario.grid, scenario.torque);
  std::vector<double> x0 = model.initial_state();
  std::vector<AtomInit> atoms = build_atoms(x0, scenario.quanta);
  return {std::move(model), std::move(atoms), machine_dependency_graph(),
          torque_input_schedule(scenario.torque, scenario.torque_steps), std::move(x0)};
}

double time_constant_ratio(const MachineModel& model, std::span<const double> state, double t) {
  Eigen::Matrix<double, kNumStates, kNumStates> jac;
  std::vector<double> work(state.begin(), state.end());
  for (int j = 0; j < kNumStates; ++j) {
    const double xj = work[static_cast<std::size_t>(j)];
    const double h = std::max(1e-7, 1e-7 * std::abs(xj));
    work[static_cast<std::size_t>(j)] = xj + h;
    std::array<double, kNumStates> f_plus{};
    for (int i = 0; i < kNumStates; ++i) {
      f_plus[static_cast<std::size_t>(i)] = model.deriv(i, work, t);
    }
    work[static_cast<std::size_t>(j)] = xj - h;
    for (int i = 0; i < kNumStates; ++i) {
      jac(i, j) = (f_plus[static_cast<std::size_t>(i)] - model.deriv(i, work, t)) / (2.0 * h);
    }
    work[static_cast<std::size_t>(j)] = xj;
  }
  const Eigen::EigenSolver<Eigen::Matrix<double, kNumStates, kNumStates>> solver(jac);
  double lo = kInf;
  double hi = 0.0;
  for (int i = 0; i < kNumStates; ++i) {
    const double mag = std::abs(solver.eigenvalues()[i]);
    if (mag < 1e-9) {
      continue;  // numerically zero mode carries no time constant
    }
    lo = std::min(lo, mag);
    hi = std::max(hi, mag);
  }
  return hi / lo;
}

}  // namespace liqss
