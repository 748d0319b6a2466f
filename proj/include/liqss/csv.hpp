#pragma once

// CSV emission and parse-back. Numbers are written in the shortest decimal
// form that round-trips exactly.

#include "liqss/analysis.hpp"
#include "liqss/qss.hpp"
#include "liqss/reference.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liqss {

std::string format_double(double value);
double parse_double(std::string_view text);  // throws std::invalid_argument

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  double number(std::size_t row, std::size_t col) const;
  int column(std::string_view name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);

void write_reference_csv(const std::filesystem::path& path, const DenseTrajectory& ref,
                         std::span<const std::string> names);
void write_events_csv(const std::filesystem::path& path, const EventTrajectory& events);
void write_resampled_csv(const std::filesystem::path& path, const ResampledSeries& series,
                         std::span<const std::string> names);
void write_updates_csv(const std::filesystem::path& path, std::span<const std::string> names,
                       std::span<const std::uint64_t> counts, std::span<const double> intensity);
void write_error_report_csv(const std::filesystem::path& path,
                            std::span<const std::string> names, const ErrorReport& report);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);

}  // namespace liqss
