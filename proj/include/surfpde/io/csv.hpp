#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/io/format.hpp"

namespace surfpde {

inline constexpr const char* kRecoveryCsvHeader = "time_s,mean_concentration,roi_area";

/// One row of a recovery series.
struct RecoverySample {
  double time_s = 0.0;
  double mean_concentration = 0.0;
  double roi_area = 0.0;
};

/// Writes the recovery series CSV: fixed header, one row per sample, 17
/// significant digits (lossless round-trip), deterministic bytes.
inline void write_recovery_csv(const std::string& path, std::span<const double> times,
                               std::span<const double> means, std::span<const double> areas) {
  if (times.size() != means.size() || times.size() != areas.size())
    throw ValidationError("recovery csv: column length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << kRecoveryCsvHeader << '\n';
  for (std::size_t i = 0; i < times.size(); ++i)
    out << format_double_17(times[i]) << ',' << format_double_17(means[i]) << ','
        << format_double_17(areas[i]) << '\n';
  if (!out) throw IoError(path + ": write failed");
}

/// Reads a recovery series CSV written by write_recovery_csv (or any file
/// with the same header and numeric rows).
inline std::vector<RecoverySample> read_recovery_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecoveryCsvHeader)
    throw IoError(path + ":1: expected header '" + std::string(kRecoveryCsvHeader) +
                  "', got '" + line + "'");
  std::vector<RecoverySample> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos)
      throw IoError(where + ": expected 3 comma-separated values");
    RecoverySample s;
    s.time_s = parse_double(std::string_view(line).substr(0, c1), where);
    s.mean_concentration = parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), where);
    s.roi_area = parse_double(std::string_view(line).substr(c2 + 1), where);
    rows.push_back(s);
  }
  return rows;
}

} // namespace surfpde
