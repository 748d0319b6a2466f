#include "liqss/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace liqss {

std::vector<double> resample_one(const EventTrajectory& events, const SampleGrid& grid) {
  if (events.t.empty()) {
    throw std::invalid_argument("cannot resample an empty event list");
  }
  if (grid.t0 < events.t.front()) {
    throw std::invalid_argument("grid starts before the first event");
  }
  std::vector<double> out(grid.count);
  std::size_t e = 0;
  for (std::size_t k = 0; k < grid.count; ++k) {
    const double t = grid.time_at(k);
    while (e + 1 < events.t.size() && events.t[e + 1] <= t) {
      ++e;
    }
    out[k] = events.q[e];
  }
  return out;
}

ResampledSeries resample(std::span<const EventTrajectory> events, const SampleGrid& grid) {
  ResampledSeries out;
  out.t0 = grid.t0;
  out.dt = grid.dt;
  out.states.reserve(events.size());
  for (const auto& traj : events) {
    out.states.push_back(resample_one(traj, grid));
  }
  return out;
}

ResamplingSink::ResamplingSink(int num_atoms, const SampleGrid& grid)
    : grid_(grid),
      cursor_(static_cast<std::size_t>(num_atoms), 0),
      last_(static_cast<std::size_t>(num_atoms), 0.0) {
  series_.t0 = grid.t0;
  series_.dt = grid.dt;
  series_.states.assign(static_cast<std::size_t>(num_atoms), std::vector<double>(grid.count));
}

void ResamplingSink::on_record(int atom, double t, double q) {
  const auto a = static_cast<std::size_t>(atom);
  auto& cur = cursor_[a];
  auto& col = series_.states[a];
  while (cur < grid_.count && grid_.time_at(cur) < t) {
    col[cur] = last_[a];
    ++cur;
  }
  last_[a] = q;
}

ResampledSeries ResamplingSink::take() {
  for (std::size_t a = 0; a < series_.states.size(); ++a) {
    auto& col = series_.states[a];
    for (auto cur = cursor_[a]; cur < grid_.count; ++cur) {
      col[cur] = last_[a];
    }
    cursor_[a] = grid_.count;
  }
  return std::move(series_);
}

WindowCountSink::WindowCountSink(int num_atoms, std::vector<std::pair<double, double>> windows)
    : windows_(std::move(windows)),
      counts_(windows_.size(), std::vector<std::uint64_t>(static_cast<std::size_t>(num_atoms), 0)) {}

void WindowCountSink::on_record(int atom, double t, double q) {
  (void)q;
  if (t == 0.0) {
    return;  // initial record
  }
  for (std::size_t w = 0; w < windows_.size(); ++w) {
    if (t >= windows_[w].first && t < windows_[w].second) {
      ++counts_[w][static_cast<std::size_t>(atom)];
    }
  }
}

std::uint64_t WindowCountSink::window_total(std::size_t w) const {
  std::uint64_t total = 0;
  for (const auto c : counts_[w]) {
    total += c;
  }
  return total;
}

std::vector<double> pointwise_error(std::span<const double> y, std::span<const double> ref) {
  if (y.size() != ref.size()) {
    throw std::invalid_argument("pointwise error requires matching grids");
  }
  std::vector<double> pe(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    pe[k] = y[k] - ref[k];
  }
  return pe;
}

Tane tane(std::span<const double> pe, std::span<const double> y) {
  if (pe.empty() || pe.size() != y.size()) {
    throw std::invalid_argument("TANE requires at least one sample and matching grids");
  }
  double sum_sq = 0.0;
  for (const double e : pe) {
    sum_sq += e * e;
  }
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  const double rms = std::sqrt(sum_sq / static_cast<double>(pe.size()));
  if (range == 0.0) {
    return {kInf, true};
  }
  return {rms / range, false};
}

double max_error(std::span<const double> tanes) {
  if (tanes.empty()) {
    throw std::invalid_argument("max_error requires at least one state");
  }
  return *std::max_element(tanes.begin(), tanes.end());
}

double update_intensity(std::uint64_t count, double duration) {
  if (!(duration > 0.0)) {
    throw std::invalid_argument("duration must be positive");
  }
  return static_cast<double>(count) / duration;
}

ErrorReport make_error_report(const ResampledSeries& y, const DenseTrajectory& ref,
                              std::span<const std::uint64_t> update_counts, double duration) {
  if (y.states.size() != ref.states.size() || y.t0 != ref.t0 || y.dt != ref.dt ||
      y.samples() != ref.samples()) {
    throw std::invalid_argument("resampled series and reference grids do not match");
  }
  ErrorReport report;
  report.duration = duration;
  for (std::size_t i = 0; i < y.states.size(); ++i) {
    const auto pe = pointwise_error(y.states[i], ref.states[i]);
    const Tane t = tane(pe, y.states[i]);
    report.tane.push_back(t.value);
    report.zero_range.push_back(t.zero_range);
  }
  for (const auto c : update_counts) {
    report.update_counts.push_back(c);
    report.intensity.push_back(update_intensity(c, duration));
    report.total_updates += c;
  }
  report.max_error = max_error(report.tane);
  return report;
}

namespace {

SweepRow run_sweep_row(const ScenarioSpec& base, const DenseTrajectory& ref, double dq) {
  ScenarioSpec scenario = base;
  scenario.quanta.flux_dq = dq;
  scenario.quanta.angle_dq = dq;
  scenario.quanta.speed_dq = dq / 10.0;

  SweepRow row;
  row.delta_q = dq;
  try {
    MachineSetup setup = make_setup(scenario);
    Simulator<MachineModel> sim(setup.model, setup.atoms, setup.graph, setup.inputs);
    ResamplingSink resampler(kNumStates, grid_of(ref));

    const auto start = std::chrono::steady_clock::now();
    const RunResult result = sim.run(scenario.t_end, &resampler);
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const ErrorReport report =
        make_error_report(resampler.take(), ref, result.update_counts, scenario.t_end);
    row.max_error = report.max_error;
    row.total_updates = report.total_updates;
  } catch (const std::exception&) {
    row.failed = true;
    row.max_error = std::numeric_limits<double>::quiet_NaN();
    row.wall_time_s = std::numeric_limits<double>::quiet_NaN();
    row.total_updates = 0;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> quantum_sweep(const ScenarioSpec& scenario, const DenseTrajectory& ref,
                                    std::span<const double> dq_list, int threads) {
  if (dq_list.empty()) {
    throw std::invalid_argument("sweep requires at least one quantum size");
  }
  for (const double dq : dq_list) {
    if (!(dq > 0.0)) {
      throw std::invalid_argument("sweep quantum sizes must be positive");
    }
  }
  std::vector<double> sorted(dq_list.begin(), dq_list.end());
  std::sort(sorted.begin(), sorted.end());

  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  threads = std::clamp(threads, 1, static_cast<int>(sorted.size()));

  std::vector<SweepRow> rows(sorted.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= sorted.size()) {
        return;
      }
      rows[k] = run_sweep_row(scenario, ref, sorted[k]);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  return rows;
}

}  // namespace liqss
