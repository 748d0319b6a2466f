#pragma once

// Error metrics against the dense reference trajectory and the quantum-size
// sweep: zero-order-hold resampling, pointwise error, time-average normalized
// error, update intensity, and sweep orchestration.

#include "liqss/machine.hpp"
#include "liqss/qss.hpp"
#include "liqss/reference.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace liqss {

struct SampleGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t count = 0;

  double time_at(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

inline SampleGrid grid_of(const DenseTrajectory& ref) {
  return {ref.t0, ref.dt, ref.samples()};
}

struct ResampledSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::vector<double>> states;  // [state][sample]

  std::size_t samples() const { return states.empty() ? 0 : states.front().size(); }
};

// Zero-order hold of one event list onto a uniform grid: each sample takes
// the most recent event value at or before its time.
std::vector<double> resample_one(const EventTrajectory& events, const SampleGrid& grid);
ResampledSeries resample(std::span<const EventTrajectory> events, const SampleGrid& grid);

// Streaming equivalent of resample(record(...)): fills the grid as records
// arrive, so long runs need no stored event lists.
class ResamplingSink : public EventSink {
 public:
  ResamplingSink(int num_atoms, const SampleGrid& grid);

  void on_record(int atom, double t, double q) override;
  ResampledSeries take();

 private:
  SampleGrid grid_;
  ResampledSeries series_;
  std::vector<std::size_t> cursor_;
  std::vector<double> last_;
};

// Per-window update counts; the initial records at t = 0 are not updates.
class WindowCountSink : public EventSink {
 public:
  WindowCountSink(int num_atoms, std::vector<std::pair<double, double>> windows);

  void on_record(int atom, double t, double q) override;
  // counts()[w][atom]: updates with t in [windows[w].first, windows[w].second)
  const std::vector<std::vector<std::uint64_t>>& counts() const { return counts_; }
  std::uint64_t window_total(std::size_t w) const;

 private:
  std::vector<std::pair<double, double>> windows_;
  std::vector<std::vector<std::uint64_t>> counts_;
};

class TeeSink : public EventSink {
 public:
  explicit TeeSink(std::vector<EventSink*> sinks) : sinks_(std::move(sinks)) {}
  void on_record(int atom, double t, double q) override {
    for (auto* s : sinks_) {
      s->on_record(atom, t, q);
    }
  }

 private:
  std::vector<EventSink*> sinks_;
};

std::vector<double> pointwise_error(std::span<const double> y, std::span<const double> ref);

struct Tane {
  double value = 0.0;
  bool zero_range = false;  // dynamic range of y was zero; value is +inf
};

Tane tane(std::span<const double> pe, std::span<const double> y);

double max_error(std::span<const double> tanes);

double update_intensity(std::uint64_t count, double duration);

struct ErrorReport {
  std::vector<double> tane;
  std::vector<bool> zero_range;
  std::vector<std::uint64_t> update_counts;
  std::vector<double> intensity;  // updates per simulated second
  std::uint64_t total_updates = 0;
  double max_error = 0.0;
  double duration = 0.0;
};

ErrorReport make_error_report(const ResampledSeries& y, const DenseTrajectory& ref,
                              std::span<const std::uint64_t> update_counts, double duration);

struct SweepRow {
  double delta_q = 0.0;
  double max_error = 0.0;
  std::uint64_t total_updates = 0;
  double wall_time_s = 0.0;
  bool failed = false;
};

// One LIQSS run per quantum size against the shared reference. Flux and
// angle quanta take the swept value, the speed quantum is one tenth of it;
// per-state overrides in the scenario stay pinned. Failed rows are recorded
// and the sweep continues. threads = 0 picks the hardware concurrency.
std::vector<SweepRow> quantum_sweep(const ScenarioSpec& scenario, const DenseTrajectory& ref,
                                    std::span<const double> dq_list, int threads = 0);

}  // namespace liqss
