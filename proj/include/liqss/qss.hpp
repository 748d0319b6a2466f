#pragma once

// Event-driven LIQSS1 integration engine.
//
// Each state variable is owned by one atom that tracks a continuous internal
// value x, a piecewise-constant quantized output q, and the time of its next
// scheduled quantum crossing. Atoms advance asynchronously: the atom with the
// smallest next-event time fires, reselects its quantized output, and flags
// the atoms whose derivatives read it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace liqss {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Derivative magnitudes below this are treated as zero when scheduling:
// they map to an infinite next-event time instead of an absurdly distant one.
inline constexpr double kDerivativeFloor = 1e-14;

// Absolute tolerance for comparing scheduled event times.
inline constexpr double kEventTimeTol = 1e-12;

// Consecutive zero-advance self-events of one atom tolerated before the run
// is declared degenerate and aborted.
inline constexpr int kMaxStalledRefires = 64;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One quantized state variable.
struct QssAtom {
  int index = 0;
  std::string name;
  double x = 0.0;        // continuous internal state
  double q = 0.0;        // quantized output
  double dx = 0.0;       // current derivative estimate
  double a = 0.0;        // linear (diagonal Jacobian) coefficient estimate
  double delta_q = 0.0;  // quantum size
  double t_last = 0.0;   // time of last internal advance
  double t_next = kInf;  // scheduled self-event time
  std::uint64_t update_count = 0;
};

struct AtomInit {
  std::string name;
  double x0 = 0.0;
  double delta_q = 0.0;
};

// dependents[i] lists the atoms whose derivative reads atom i's quantized
// output. Self-loops are not required: an atom always re-evaluates itself.
struct DependencyGraph {
  std::vector<std::vector<int>> dependents;
};

// Exogenous wake-up: at time t the model's inputs change enough that the
// listed atoms must refresh their derivatives. Carries no quantized-output
// change and does not touch update counts.
struct InputEvent {
  double t = 0.0;
  std::vector<int> atoms;
};

// Piecewise-constant output history of one atom: the initial value plus one
// record per quantized-output change. Same-instant changes are coalesced, so
// the list may hold fewer records than the atom's update count.
struct EventTrajectory {
  std::vector<double> t;
  std::vector<double> q;

  std::size_t size() const { return t.size(); }
};

// Receives every quantized-output record (initial values included).
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_record(int atom, double t, double q) = 0;
};

class RecordingSink : public EventSink {
 public:
  explicit RecordingSink(int num_atoms) : trajectories_(num_atoms) {}

  void on_record(int atom, double t, double q) override {
    auto& traj = trajectories_[static_cast<std::size_t>(atom)];
    if (!traj.t.empty() && traj.t.back() == t) {
      // Same-instant reselection: keep only the final value at this time.
      if (traj.t.size() >= 2 && traj.q[traj.q.size() - 2] == q) {
        traj.t.pop_back();
        traj.q.pop_back();
      } else {
        traj.q.back() = q;
      }
      return;
    }
    traj.t.push_back(t);
    traj.q.push_back(q);
  }

  const std::vector<EventTrajectory>& trajectories() const { return trajectories_; }
  std::vector<EventTrajectory> take() { return std::move(trajectories_); }

 private:
  std::vector<EventTrajectory> trajectories_;
};

// Earliest time >= t_now at which the linear extrapolation of x crosses the
// next quantization boundary (q + delta_q when rising, q - delta_q when
// falling). Degenerate derivatives never cross.
inline double next_event_time(double x, double q, double dx, double delta_q, double t_now) {
  if (std::abs(dx) < kDerivativeFloor) {
    return kInf;
  }
  const double boundary = dx > 0.0 ? q + delta_q : q - delta_q;
  const double dt = (boundary - x) / dx;
  return t_now + std::max(dt, 0.0);
}

// Linear extrapolation of the internal state between events.
inline double advance_internal(double x, double dx, double dt) {
  return x + dx * dt;
}

// Secant estimate of the diagonal Jacobian entry. Keeps the previous estimate
// when the two quantized values are too close to carry information.
inline double update_linear_coefficient(double f_new, double f_old, double q_new, double q_old,
                                        double a_prev) {
  const double dq = q_new - q_old;
  const double floor = 1e-12 * std::max({1.0, std::abs(q_new), std::abs(q_old)});
  if (std::abs(dq) <= floor) {
    return a_prev;
  }
  return (f_new - f_old) / dq;
}

// LIQSS1 quantized-value selection. Candidates sit one quantum above and
// below the previous output. A candidate whose derivative points away from
// the band is consistent and wins; when the derivative sign flips between the
// candidates (the stiff case), the root of the linear model f(q) ~= f(q_c) +
// a (q - q_c) is used instead, clamped into the band. With no coefficient
// estimate yet, falls back to the internal state.
template <typename F>
double liqss1_select_q(double x, double q_prev, double delta_q, double a, F&& f_eval) {
  const double q_up = q_prev + delta_q;
  const double f_up = f_eval(q_up);
  if (f_up >= 0.0) {
    return q_up;
  }
  const double q_dn = q_prev - delta_q;
  const double f_dn = f_eval(q_dn);
  if (f_dn <= 0.0) {
    return q_dn;
  }
  if (a == 0.0) {
    return x;
  }
  const double root = q_dn - f_dn / a;
  return std::clamp(root, q_dn, q_up);
}

// Min-heap over per-atom next-event times with per-key update. Ties resolve
// to the lowest atom index so runs are deterministic.
class EventSchedule {
 public:
  void reset(std::span<const double> times) {
    const int n = static_cast<int>(times.size());
    time_.assign(times.begin(), times.end());
    heap_.resize(static_cast<std::size_t>(n));
    pos_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      heap_[static_cast<std::size_t>(i)] = i;
      pos_[static_cast<std::size_t>(i)] = i;
    }
    for (int i = n / 2 - 1; i >= 0; --i) {
      sift_down(i);
    }
  }

  void update(int atom, double t) {
    time_[static_cast<std::size_t>(atom)] = t;
    const int i = pos_[static_cast<std::size_t>(atom)];
    if (!sift_up(i)) {
      sift_down(i);
    }
  }

  int top_atom() const { return heap_[0]; }
  double top_time() const { return time_[static_cast<std::size_t>(heap_[0])]; }
  bool empty() const { return heap_.empty(); }

 private:
  bool before(int a, int b) const {
    const double ta = time_[static_cast<std::size_t>(a)];
    const double tb = time_[static_cast<std::size_t>(b)];
    if (ta != tb) {
      return ta < tb;
    }
    return a < b;
  }

  bool sift_up(int i) {
    bool moved = false;
    while (i > 0) {
      const int parent = (i - 1) / 2;
      if (!before(heap_[static_cast<std::size_t>(i)], heap_[static_cast<std::size_t>(parent)])) {
        break;
      }
      swap_nodes(i, parent);
      i = parent;
      moved = true;
    }
    return moved;
  }

  void sift_down(int i) {
    const int n = static_cast<int>(heap_.size());
    while (true) {
      int best = i;
      const int l = 2 * i + 1;
      const int r = 2 * i + 2;
      if (l < n && before(heap_[static_cast<std::size_t>(l)], heap_[static_cast<std::size_t>(best)])) {
        best = l;
      }
      if (r < n && before(heap_[static_cast<std::size_t>(r)], heap_[static_cast<std::size_t>(best)])) {
        best = r;
      }
      if (best == i) {
        return;
      }
      swap_nodes(i, best);
      i = best;
    }
  }

  void swap_nodes(int i, int j) {
    std::swap(heap_[static_cast<std::size_t>(i)], heap_[static_cast<std::size_t>(j)]);
    pos_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
    pos_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(j)])] = j;
  }

  std::vector<double> time_;
  std::vector<int> heap_;  // heap of atom indices
  std::vector<int> pos_;   // atom index -> heap slot
};

struct RunResult {
  std::vector<std::uint64_t> update_counts;
  std::uint64_t total_updates = 0;
  double t_final = 0.0;
};

// The asynchronous event loop over one model instance. Model must provide
//   int num_states() const
//   double deriv(int i, std::span<const double> q, double t) const
// A simulator owns all of its state; one instance must not be driven from
// multiple threads, but independent instances may run fully in parallel.
template <typename Model>
class Simulator {
 public:
  Simulator(const Model& model, std::vector<AtomInit> init, DependencyGraph graph,
            std::vector<InputEvent> inputs = {})
      : model_(&model),
        init_(std::move(init)),
        graph_(std::move(graph)),
        inputs_(std::move(inputs)) {
    const int n = static_cast<int>(init_.size());
    if (n == 0 || n != model_->num_states()) {
      throw std::invalid_argument("atom count does not match model state count");
    }
    if (static_cast<int>(graph_.dependents.size()) != n) {
      throw std::invalid_argument("dependency graph size does not match atom count");
    }
    for (const auto& a : init_) {
      if (!(a.delta_q > 0.0)) {
        throw std::invalid_argument("quantum size must be positive: " + a.name);
      }
    }
    if (!std::is_sorted(inputs_.begin(), inputs_.end(),
                        [](const InputEvent& a, const InputEvent& b) { return a.t < b.t; })) {
      throw std::invalid_argument("input events must be sorted by time");
    }
  }

  // One handled event: either the next exogenous input batch or the atom
  // self-event with the smallest t_next. atom is -1 for input batches.
  struct StepEvent {
    double t = 0.0;
    int atom = -1;
    bool input = false;
  };

  // Resets atoms to their initial values and records the t = 0 outputs.
  void start(EventSink* sink = nullptr) { initialize(sink); }

  // Processes the next event if it falls at or before t_end.
  std::optional<StepEvent> step(double t_end, EventSink* sink = nullptr) {
    const double t_atom = schedule_.top_time();
    const double t_input = input_cursor_ < inputs_.size() ? inputs_[input_cursor_].t : kInf;
    const double t = std::min(t_atom, t_input);
    if (!(t <= t_end)) {
      return std::nullopt;
    }
    if (t_input <= t_atom) {
      // Exogenous input changes take effect before atom events at the same
      // timestamp so firing atoms see fresh inputs.
      for (int atom : inputs_[input_cursor_].atoms) {
        handle_input_change(atom, t_input);
      }
      ++input_cursor_;
      return StepEvent{t_input, -1, true};
    }
    const int atom = schedule_.top_atom();
    handle_self_event(atom, t_atom, sink);
    return StepEvent{t_atom, atom, false};
  }

  RunResult result(double t_final) const {
    RunResult res;
    res.update_counts.reserve(atoms_.size());
    for (const auto& a : atoms_) {
      res.update_counts.push_back(a.update_count);
      res.total_updates += a.update_count;
    }
    res.t_final = t_final;
    return res;
  }

  RunResult run(double t_end, EventSink* sink = nullptr) {
    if (!(t_end > 0.0)) {
      throw std::invalid_argument("t_end must be positive");
    }
    start(sink);
    while (step(t_end, sink)) {
    }
    return result(t_end);
  }

  const QssAtom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  int num_atoms() const { return static_cast<int>(atoms_.size()); }

 private:
  void initialize(EventSink* sink) {
    const int n = static_cast<int>(init_.size());
    atoms_.assign(static_cast<std::size_t>(n), QssAtom{});
    q_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& a = atoms_[static_cast<std::size_t>(i)];
      a.index = i;
      a.name = init_[static_cast<std::size_t>(i)].name;
      a.x = init_[static_cast<std::size_t>(i)].x0;
      a.q = a.x;
      a.delta_q = init_[static_cast<std::size_t>(i)].delta_q;
      a.a = 0.0;
      a.t_last = 0.0;
      a.update_count = 0;
      q_[static_cast<std::size_t>(i)] = a.q;
    }
    std::vector<double> times(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& a = atoms_[static_cast<std::size_t>(i)];
      a.dx = model_->deriv(i, q_, 0.0);
      a.t_next = next_event_time(a.x, a.q, a.dx, a.delta_q, 0.0);
      times[static_cast<std::size_t>(i)] = a.t_next;
      check_finite(a, 0.0);
      if (sink != nullptr) {
        sink->on_record(i, 0.0, a.q);
      }
    }
    schedule_.reset(times);
    input_cursor_ = 0;
    stall_atom_ = -1;
    stall_time_ = 0.0;
    stall_count_ = 0;
  }

  double eval_own(int i, double q_candidate, double t) {
    const double saved = q_[static_cast<std::size_t>(i)];
    q_[static_cast<std::size_t>(i)] = q_candidate;
    const double f = model_->deriv(i, q_, t);
    q_[static_cast<std::size_t>(i)] = saved;
    last_eval_q_ = q_candidate;
    last_eval_f_ = f;
    return f;
  }

  void handle_self_event(int i, double t, EventSink* sink) {
    auto& a = atoms_[static_cast<std::size_t>(i)];
    if (std::abs(t - a.t_next) > kEventTimeTol) {
      throw std::logic_error("scheduling inconsistency on atom " + a.name);
    }
    guard_stall(a, t);

    a.x = advance_internal(a.x, a.dx, t - a.t_last);
    a.t_last = t;
    check_finite(a, t);

    const double q_prev = a.q;
    const double q_new =
        liqss1_select_q(a.x, q_prev, a.delta_q, a.a,
                        [&](double cand) { return eval_own(i, cand, t); });
    // Secant against the pre-event derivative, which was evaluated at q_prev
    // with the same inputs as the candidates.
    a.a = update_linear_coefficient(last_eval_f_, a.dx, last_eval_q_, q_prev, a.a);
    a.q = q_new;
    q_[static_cast<std::size_t>(i)] = q_new;
    a.dx = q_new == last_eval_q_ ? last_eval_f_ : model_->deriv(i, q_, t);
    a.t_next = next_event_time(a.x, a.q, a.dx, a.delta_q, t);
    schedule_.update(i, a.t_next);
    check_finite(a, t);

    if (q_new != q_prev) {
      ++a.update_count;
      if (sink != nullptr) {
        sink->on_record(i, t, q_new);
      }
      for (int dep : graph_.dependents[static_cast<std::size_t>(i)]) {
        handle_input_change(dep, t);
      }
    }
  }

  void handle_input_change(int i, double t) {
    auto& a = atoms_[static_cast<std::size_t>(i)];
    a.x = advance_internal(a.x, a.dx, t - a.t_last);
    a.t_last = t;
    a.dx = model_->deriv(i, q_, t);
    a.t_next = next_event_time(a.x, a.q, a.dx, a.delta_q, t);
    schedule_.update(i, a.t_next);
    check_finite(a, t);
  }

  void guard_stall(const QssAtom& a, double t) {
    if (a.index == stall_atom_ && t == stall_time_ && t == a.t_last) {
      if (++stall_count_ > kMaxStalledRefires) {
        throw NumericalError("atom " + a.name + " stalled at t=" + std::to_string(t));
      }
    } else {
      stall_atom_ = a.index;
      stall_time_ = t;
      stall_count_ = 0;
    }
  }

  void check_finite(const QssAtom& a, double t) const {
    if (!std::isfinite(a.x) || !std::isfinite(a.dx)) {
      throw NumericalError("non-finite state in atom " + a.name + " at t=" + std::to_string(t));
    }
  }

  const Model* model_;
  std::vector<AtomInit> init_;
  DependencyGraph graph_;
  std::vector<InputEvent> inputs_;

  std::vector<QssAtom> atoms_;
  std::vector<double> q_;
  EventSchedule schedule_;
  std::size_t input_cursor_ = 0;
  double last_eval_q_ = 0.0;
  double last_eval_f_ = 0.0;
  int stall_atom_ = -1;
  double stall_time_ = 0.0;
  int stall_count_ = 0;
};

}  // namespace liqss
