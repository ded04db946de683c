#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace socdiffuse {

/// One invariant: measured value, threshold, and the relation between them.
struct Check {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  /// "<", "<=", ">=", ">", "==", or "|measured - target| <=".
  std::string relation;
  std::optional<double> target;
  bool passed = false;
};

Check check_less(std::string name, double measured, double threshold);
Check check_at_most(std::string name, double measured, double threshold);
Check check_at_least(std::string name, double measured, double threshold);
Check check_greater(std::string name, double measured, double threshold);
Check check_equal(std::string name, double measured, double expected);
Check check_near(std::string name, double measured, double target, double tolerance);

/// Numeric table emitted as CSV next to the report.
struct Table {
  std::string file;  ///< relative file name
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double terminal_cost = 0.0;
  std::optional<double> baseline_terminal_cost;
};

struct RunReport {
  std::string name;  ///< experiment kind or suite name
  std::optional<std::uint64_t> seed;
  std::string config_echo;
  std::vector<Check> checks;
  std::vector<SeedResult> seeds;
  std::vector<Table> tables;
  std::vector<std::string> artifacts;  ///< relative to the output directory
  std::vector<std::pair<std::string, double>> metrics;

  bool passed() const;
  void add(const Check& c) { checks.push_back(c); }
  void add(const std::vector<Check>& cs) { checks.insert(checks.end(), cs.begin(), cs.end()); }
};

/// Deterministic JSON (fixed key order, no timestamps).
std::string report_json(const RunReport& report);

/// Writes every table, then checks.csv and summary.json, into `dir`, and
/// records their names in the report. Throws std::runtime_error on I/O failure.
void write_report(RunReport& report, const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_table(const Table& table, const std::filesystem::path& path);

/// Human-readable one-line-per-check listing.
std::string format_checks(const RunReport& report);

}  // namespace socdiffuse
