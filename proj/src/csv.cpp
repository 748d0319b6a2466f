#include "liqss/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace liqss {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  return out;
}

void append_double(std::string& line, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  line.append(buf, res.ptr);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: \"" + std::string(text) + "\"");
  }
  return value;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  return parse_double(rows.at(row).at(col));
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open CSV file: " + path.string());
  }
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) {
    table.header = split_line(line);
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    table.rows.push_back(split_line(line));
  }
  return table;
}

void write_reference_csv(const std::filesystem::path& path, const DenseTrajectory& ref,
                         std::span<const std::string> names) {
  auto out = open_out(path);
  std::string line = "t";
  for (const auto& name : names) {
    line += ',';
    line += name;
  }
  line += '\n';
  out << line;
  for (std::size_t k = 0; k < ref.samples(); ++k) {
    line.clear();
    append_double(line, ref.time_at(k));
    for (const auto& col : ref.states) {
      line += ',';
      append_double(line, col[k]);
    }
    line += '\n';
    out << line;
  }
}

void write_events_csv(const std::filesystem::path& path, const EventTrajectory& events) {
  auto out = open_out(path);
  out << "t,q\n";
  std::string line;
  for (std::size_t k = 0; k < events.size(); ++k) {
    line.clear();
    append_double(line, events.t[k]);
    line += ',';
    append_double(line, events.q[k]);
    line += '\n';
    out << line;
  }
}

void write_resampled_csv(const std::filesystem::path& path, const ResampledSeries& series,
                         std::span<const std::string> names) {
  auto out = open_out(path);
  std::string line = "t";
  for (const auto& name : names) {
    line += ',';
    line += name;
  }
  line += '\n';
  out << line;
  for (std::size_t k = 0; k < series.samples(); ++k) {
    line.clear();
    append_double(line, series.t0 + series.dt * static_cast<double>(k));
    for (const auto& col : series.states) {
      line += ',';
      append_double(line, col[k]);
    }
    line += '\n';
    out << line;
  }
}

void write_updates_csv(const std::filesystem::path& path, std::span<const std::string> names,
                       std::span<const std::uint64_t> counts, std::span<const double> intensity) {
  auto out = open_out(path);
  out << "state,count,intensity\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ',' << counts[i] << ',' << format_double(intensity[i]) << '\n';
  }
}

void write_error_report_csv(const std::filesystem::path& path,
                            std::span<const std::string> names, const ErrorReport& report) {
  auto out = open_out(path);
  out << "state,tane,count,intensity\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ',' << format_double(report.tane[i]) << ',' << report.update_counts[i]
        << ',' << format_double(report.intensity[i]) << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
  auto out = open_out(path);
  out << "delta_q,max_error,total_updates,wall_time_s\n";
  for (const auto& row : rows) {
    out << format_double(row.delta_q) << ',' << format_double(row.max_error) << ','
        << row.total_updates << ',' << format_double(row.wall_time_s) << '\n';
  }
}

}  // namespace liqss
