#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "q3/runner.hpp"

namespace q3 {

enum class ReportFormat { Json, Csv };

ReportFormat parse_format(const std::string& name);

/// Writes `report.json` (json) or one CSV per table plus `summary.csv` and
/// `scenario.json` (csv). Pass tables are always written as CSV. Each file
/// is written to a temporary name and renamed into place. Returns the
/// written paths.
std::vector<std::filesystem::path> emit_report(const Report& report, const std::filesystem::path& dir,
                                               ReportFormat format);

/// Temp file + rename; throws an IO error naming the path.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string to_csv(const CsvTable& t);

}  // namespace q3
