#include "socdiffuse/report.hpp"

#include <rbm/matrix_io.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace socdiffuse {

Check check_less(std::string name, double measured, double threshold) {
  return {std::move(name), measured, threshold, "<", std::nullopt, measured < threshold};
}

Check check_at_most(std::string name, double measured, double threshold) {
  return {std::move(name), measured, threshold, "<=", std::nullopt, measured <= threshold};
}

Check check_at_least(std::string name, double measured, double threshold) {
  return {std::move(name), measured, threshold, ">=", std::nullopt, measured >= threshold};
}

Check check_greater(std::string name, double measured, double threshold) {
  return {std::move(name), measured, threshold, ">", std::nullopt, measured > threshold};
}

Check check_equal(std::string name, double measured, double expected) {
  return {std::move(name), measured, expected, "==", std::nullopt, measured == expected};
}

Check check_near(std::string name, double measured, double target, double tolerance) {
  return {std::move(name), measured, tolerance, "|measured - target| <=", target,
          std::abs(measured - target) <= tolerance};
}

bool RunReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

namespace {

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return rbm::format_double(v);  // "nan" / "inf" as strings
  return v;
}

}  // namespace

std::string report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  if (r.seed) j["seed"] = *r.seed;
  j["passed"] = r.passed();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["measured"] = number(c.measured);
    e["relation"] = c.relation;
    if (c.target) e["target"] = number(*c.target);
    e["threshold"] = number(c.threshold);
    e["passed"] = c.passed;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  auto metrics = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = number(v);
  j["metrics"] = std::move(metrics);
  if (!r.seeds.empty()) {
    auto seeds = nlohmann::ordered_json::array();
    for (const auto& s : r.seeds) {
      nlohmann::ordered_json e;
      e["seed"] = s.seed;
      e["terminal_cost"] = number(s.terminal_cost);
      if (s.baseline_terminal_cost) e["baseline_terminal_cost"] = number(*s.baseline_terminal_cost);
      seeds.push_back(std::move(e));
    }
    j["seeds"] = std::move(seeds);
  }
  j["artifacts"] = r.artifacts;
  if (!r.config_echo.empty()) j["config"] = r.config_echo;
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_table(const Table& table, const std::filesystem::path& path) {
  std::ostringstream o;
  for (std::size_t i = 0; i < table.header.size(); ++i) o << (i ? "," : "") << table.header[i];
  o << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) o << (i ? "," : "") << rbm::format_double(row[i]);
    o << '\n';
  }
  write_text(path, o.str());
}

void write_report(RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  for (const auto& t : report.tables) {
    write_table(t, dir / t.file);
    report.artifacts.push_back(t.file);
  }
  std::ostringstream o;
  o << "name,measured,relation,target,threshold,passed\n";
  for (const auto& c : report.checks) {
    o << '"' << c.name << "\"," << rbm::format_double(c.measured) << ",\"" << c.relation << "\","
      << (c.target ? rbm::format_double(*c.target) : "") << ','
      << rbm::format_double(c.threshold) << ',' << (c.passed ? 1 : 0) << '\n';
  }
  write_text(dir / "checks.csv", o.str());
  report.artifacts.push_back("checks.csv");
  report.artifacts.push_back("summary.json");
  write_text(dir / "summary.json", report_json(report));
}

std::string format_checks(const RunReport& r) {
  std::ostringstream o;
  for (const auto& c : r.checks) {
    o << (c.passed ? "PASS " : "FAIL ") << c.name << ": measured " << rbm::format_double(c.measured);
    if (c.target) {
      o << ", target " << rbm::format_double(*c.target) << " +/- " << rbm::format_double(c.threshold);
    } else {
      o << ' ' << c.relation << ' ' << rbm::format_double(c.threshold);
    }
    o << '\n';
  }
  return o.str();
}

}  // namespace socdiffuse
