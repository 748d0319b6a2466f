#pragma once

// Small closed-form models shared by the test suites. The analytic solutions
// here are the oracles the event-driven results are checked against.

#include "liqss/qss.hpp"

#include <array>
#include <cmath>
#include <span>

namespace liqss::testmodels {

// x' = -x, x(0) known; solution x0 * exp(-t).
struct ScalarDecay {
  int num_states() const { return 1; }
  double deriv(int, std::span<const double> q, double) const { return -q[0]; }
};

// x' = rate * (target - x)
struct ScalarRelax {
  double rate = 1.0;
  double target = 0.0;
  int num_states() const { return 1; }
  double deriv(int, std::span<const double> q, double) const { return rate * (target - q[0]); }
};

// x' = A q + b
struct Linear2 {
  std::array<std::array<double, 2>, 2> a{};
  std::array<double, 2> b{};
  int num_states() const { return 2; }
  double deriv(int i, std::span<const double> q, double) const {
    const auto row = static_cast<std::size_t>(i);
    return a[row][0] * q[0] + a[row][1] * q[1] + b[row];
  }
};

// Symmetric stiff pair with eigenvalues -1 and -1000 (time constants 1 s and
// 1 ms). From x(0) = (1, 0) the exact solution splits evenly across the
// eigenvectors (1,1) and (1,-1).
inline Linear2 stiff_pair() {
  Linear2 m;
  m.a = {{{-500.5, 499.5}, {499.5, -500.5}}};
  m.b = {0.0, 0.0};
  return m;
}

inline std::array<double, 2> stiff_pair_solution(double t) {
  const double slow = 0.5 * std::exp(-t);
  const double fast = 0.5 * std::exp(-1000.0 * t);
  return {slow + fast, slow - fast};
}

inline DependencyGraph full_graph_2() {
  DependencyGraph g;
  g.dependents = {{1}, {0}};
  return g;
}

inline DependencyGraph empty_graph(int n) {
  DependencyGraph g;
  g.dependents.resize(static_cast<std::size_t>(n));
  return g;
}

struct ZeroModel {
  int n = 1;
  int num_states() const { return n; }
  double deriv(int, std::span<const double>, double) const { return 0.0; }
};

struct NanModel {
  int num_states() const { return 1; }
  double deriv(int, std::span<const double>, double) const {
    return std::numeric_limits<double>::quiet_NaN();
  }
};

// Derivative switches on at t = 1; only an input event can notice.
struct TimeGate {
  int num_states() const { return 1; }
  double deriv(int, std::span<const double>, double t) const { return t < 1.0 ? 0.0 : 1.0; }
};

// Atom 1's derivative is a staircase function of atom 0's quantized output.
struct StepDependent {
  int num_states() const { return 2; }
  double deriv(int i, std::span<const double> q, double) const {
    if (i == 0) {
      return 0.1;
    }
    if (q[0] < 0.15) {
      return 1.0;
    }
    if (q[0] < 0.25) {
      return -1.0;
    }
    return 0.0;
  }
};

}  // namespace liqss::testmodels
