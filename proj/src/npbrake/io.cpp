#include "npbrake/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "npbrake/errors.hpp"
#include "npbrake/version.hpp"

namespace npb {

std::string FormatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string MetaLine() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string("# npbrake ") + kVersion + " " + buf;
}

const std::vector<std::string>& ProfileColumns() {
  static const std::vector<std::string> cols{
      "k",      "s",             "l",   "v2",  "vdot", "Ft1", "Ft2", "Ft3",
      "margin", "friction_util", "Nfr", "Nfl", "Nrr",  "Nrl", "flag"};
  return cols;
}

const std::vector<std::string>& RunColumns() {
  static const std::vector<std::string> cols{
      "t",         "s",         "y",         "theta_s",   "v",             "beta",
      "delta",     "Nfr",       "Nfl",       "Nrr",       "Nrl",           "Nfr_est",
      "Nfl_est",   "Nrr_est",   "Nrl_est",   "brake_fr",  "brake_fl",      "brake_rr",
      "brake_rl",  "friction_util", "a1",    "a2",        "a3",            "margin",
      "driver_brake", "flags"};
  return cols;
}

std::vector<double> ProfileRow(const StageResult& r) {
  return {static_cast<double>(r.k), r.s, r.l, r.v2, r.vdot, r.tire_force[0], r.tire_force[1],
          r.tire_force[2], r.margin, r.friction_util, r.normals[0], r.normals[1], r.normals[2],
          r.normals[3], r.flag ? 1.0 : 0.0};
}

std::vector<double> RunRow(const LogRecord& r) {
  return {r.t,          r.s,          r.y,          r.theta_s,       r.v,
          r.beta,       r.delta,      r.normals[0], r.normals[1],    r.normals[2],
          r.normals[3], r.normals_est[0], r.normals_est[1], r.normals_est[2], r.normals_est[3],
          r.brake[0],   r.brake[1],   r.brake[2],   r.brake[3],      r.friction_util,
          r.a_proper[0], r.a_proper[1], r.a_proper[2], r.margin,     r.driver_brake,
          static_cast<double>(r.flags)};
}

namespace {

void WriteTable(std::ostream& out, const std::vector<std::string>& cols,
                const std::vector<std::vector<double>>& rows, bool meta) {
  if (meta) out << MetaLine() << '\n';
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << FormatDouble(row[i]);
    out << '\n';
  }
}

}  // namespace

void WriteProfileCsv(std::ostream& out, const SpeedProfile& profile, bool meta) {
  std::vector<std::vector<double>> rows;
  for (const StageResult& r : profile.stages) rows.push_back(ProfileRow(r));
  WriteTable(out, ProfileColumns(), rows, meta);
}

void WriteRunCsv(std::ostream& out, const std::vector<LogRecord>& log, bool meta) {
  std::vector<std::vector<double>> rows;
  rows.reserve(log.size());
  for (const LogRecord& r : log) rows.push_back(RunRow(r));
  WriteTable(out, RunColumns(), rows, meta);
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Throw(ErrorCode::kIo, "cannot write '" + path + "'");
  out << contents;
  if (!out) Throw(ErrorCode::kIo, "write to '" + path + "' failed");
}

nlohmann::json RunSummaryJson(const RunSummary& s, SimMode mode) {
  return {{"mode", ToString(mode)},
          {"completed", s.completed},
          {"reason", s.reason},
          {"max_abs_y", s.max_abs_y},
          {"max_friction_util", s.max_friction_util},
          {"min_wheel_load", s.min_wheel_load},
          {"t_end", s.t_end},
          {"s_end", s.s_end},
          {"v_end", s.v_end},
          {"plans", s.plans},
          {"infeasible_plans", s.infeasible_plans}};
}

nlohmann::json ProfileSummaryJson(const SpeedProfile& p) {
  nlohmann::json j{{"status", ToString(p.status)},
                   {"iterations", p.iterations},
                   {"stages", p.stages.size()}};
  if (p.status == SolveStatus::kOptimal) {
    int flagged = 0;
    for (const StageResult& r : p.stages) flagged += r.flag ? 1 : 0;
    j["objective"] = p.objective;
    j["continuity_residual"] = p.continuity_residual;
    j["initial_residual"] = p.initial_residual;
    j["scaled_primal_residual"] = p.residuals.scaled_primal;
    j["scaled_gap"] = p.residuals.scaled_gap;
    j["intervention_stages"] = flagged;
  }
  if (p.first_infeasible_stage >= 0) j["first_infeasible_stage"] = p.first_infeasible_stage;
  if (!p.message.empty()) j["message"] = p.message;
  return j;
}

CsvTable ParseCsv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      table.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      Throw(ErrorCode::kIo, "csv line " + std::to_string(line_no) + " has the wrong column count");
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') {
        Throw(ErrorCode::kIo, "csv line " + std::to_string(line_no) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace npb
