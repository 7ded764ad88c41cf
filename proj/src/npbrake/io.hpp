#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "npbrake/simulator.hpp"
#include "npbrake/speed_planner.hpp"

namespace npb {

// 17 significant digits, enough to round-trip any double.
std::string FormatDouble(double value);

// "# npbrake <version> <UTC timestamp>"
std::string MetaLine();

const std::vector<std::string>& ProfileColumns();
const std::vector<std::string>& RunColumns();

void WriteProfileCsv(std::ostream& out, const SpeedProfile& profile, bool meta);
void WriteRunCsv(std::ostream& out, const std::vector<LogRecord>& log, bool meta);

// Writes to a path, throwing Io on failure.
void WriteFile(const std::string& path, const std::string& contents);

nlohmann::json RunSummaryJson(const RunSummary& summary, SimMode mode);
nlohmann::json ProfileSummaryJson(const SpeedProfile& profile);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Lines starting with '#' are skipped. Throws Io on malformed rows.
CsvTable ParseCsv(const std::string& text);

std::vector<double> ProfileRow(const StageResult& r);
std::vector<double> RunRow(const LogRecord& r);

}  // namespace npb
