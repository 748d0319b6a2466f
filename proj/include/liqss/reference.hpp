#pragma once

// Fixed-step forward-Euler reference solution over the same model derivative
// path the event-driven solver uses.

#include "liqss/machine.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace liqss {

struct DenseTrajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::vector<double>> states;  // [state][sample]

  std::size_t samples() const { return states.empty() ? 0 : states.front().size(); }
  double time_at(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

template <typename Model>
std::vector<double> euler_step(std::span<const double> state, double t, double h,
                               const Model& model) {
  const int n = model.num_states();
  std::vector<double> next(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    next[static_cast<std::size_t>(i)] =
        state[static_cast<std::size_t>(i)] + h * model.deriv(i, state, t);
  }
  return next;
}

template <typename Model>
DenseTrajectory run_reference(const Model& model, std::span<const double> x0, double t_end,
                              double h) {
  if (!(h > 0.0) || !(t_end > 0.0)) {
    throw std::invalid_argument("step size and horizon must be positive");
  }
  const int n = model.num_states();
  const auto steps = static_cast<std::size_t>(std::llround(t_end / h));

  // Divergence envelope: a stable run never leaves ten times the initial
  // magnitude scale.
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    scale = std::max(scale, std::abs(x0[static_cast<std::size_t>(i)]));
  }
  const double bound = 10.0 * scale;

  DenseTrajectory out;
  out.t0 = 0.0;
  out.dt = h;
  out.states.assign(static_cast<std::size_t>(n), {});
  for (auto& col : out.states) {
    col.reserve(steps + 1);
  }

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> dx(static_cast<std::size_t>(n));
  for (std::size_t k = 0;; ++k) {
    for (int i = 0; i < n; ++i) {
      out.states[static_cast<std::size_t>(i)].push_back(x[static_cast<std::size_t>(i)]);
    }
    if (k == steps) {
      break;
    }
    const double t = h * static_cast<double>(k);
    for (int i = 0; i < n; ++i) {
      dx[static_cast<std::size_t>(i)] = model.deriv(i, x, t);
    }
    for (int i = 0; i < n; ++i) {
      auto& xi = x[static_cast<std::size_t>(i)];
      xi += h * dx[static_cast<std::size_t>(i)];
      if (!std::isfinite(xi) || std::abs(xi) > bound) {
        throw NumericalError("reference solution diverged in state " + std::to_string(i) +
                             " after " + std::to_string(k + 1) + " steps");
      }
    }
  }
  return out;
}

// Euler solution of the machine scenario at the configured step size.
DenseTrajectory run_reference_scenario(const ScenarioSpec& scenario);

}  // namespace liqss
