#include <socdiffuse/artifacts.hpp>
#include <socdiffuse/report.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace socdiffuse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("socdiffuse_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

rbm::Trajectory ramp(int steps) {
  rbm::Trajectory t;
  for (int k = 0; k <= steps; ++k) {
    t.states.push_back({rbm::Vector::Constant(2, 0.1 * k), steps - k});
    if (k < steps) t.controls.push_back(rbm::Vector::Constant(2, 0.01));
    t.costs.push_back(1.0 / (1.0 + k));
  }
  return t;
}

RunReport sample_report() {
  RunReport r;
  r.name = "unit";
  r.seed = 4;
  r.config_echo = "experiment.kind = verify-afa\n";
  r.add(check_less("a", 0.5, 1.0));
  r.add(check_near("b", 2.05, 2.0, 0.1));
  r.metrics.emplace_back("m", 0.25);
  r.tables.push_back({"t.csv", {"x", "y"}, {{0, 1}, {1, 0.5}, {2, 0.25}}});
  return r;
}

}  // namespace

TEST(Checks, Relations) {
  EXPECT_TRUE(check_less("x", 1, 2).passed);
  EXPECT_FALSE(check_less("x", 2, 2).passed);
  EXPECT_TRUE(check_at_most("x", 2, 2).passed);
  EXPECT_TRUE(check_at_least("x", 2, 2).passed);
  EXPECT_FALSE(check_greater("x", 2, 2).passed);
  EXPECT_TRUE(check_equal("x", 0, 0).passed);
  EXPECT_TRUE(check_near("x", 1.95, 2, 0.1).passed);
  EXPECT_FALSE(check_near("x", 1.85, 2, 0.1).passed);
  EXPECT_FALSE(check_at_most("x", std::nan(""), 1).passed);
}

TEST(Report, PassedNeedsEveryCheck) {
  auto r = sample_report();
  EXPECT_TRUE(r.passed());
  r.add(check_less("c", 3, 1));
  EXPECT_FALSE(r.passed());
  const auto text = format_checks(r);
  EXPECT_NE(text.find("FAIL"), std::string::npos);
  EXPECT_NE(text.find("PASS"), std::string::npos);
}

TEST(Report, JsonIsDeterministic) {
  const auto a = report_json(sample_report()), b = report_json(sample_report());
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"unit\""), std::string::npos);
}

TEST(Report, WriteIsByteStable) {
  const auto dir = scratch("report");
  auto r1 = sample_report();
  write_report(r1, dir);
  const auto summary = slurp(dir / "summary.json"), checks = slurp(dir / "checks.csv"),
             table = slurp(dir / "t.csv");
  auto r2 = sample_report();
  write_report(r2, dir);
  EXPECT_EQ(slurp(dir / "summary.json"), summary);
  EXPECT_EQ(slurp(dir / "checks.csv"), checks);
  EXPECT_EQ(slurp(dir / "t.csv"), table);
  EXPECT_EQ(table, "x,y\n0,1\n1,0.5\n2,0.25\n");
  EXPECT_THROW(write_text("/nonexistent/dir/f.txt", "x"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Artifacts, TrajectoryCsvHasOneRowPerState) {
  const auto t = ramp(50);
  const auto csv = trajectory_csv({{7, &t}});
  std::istringstream in(csv);
  std::string line;
  int rows = -1;
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "seed,step,x_0,x_1,u_0,u_1,terminal_cost");
  for (rows = 0; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 51);
  EXPECT_EQ(csv, trajectory_csv({{7, &t}}));
}

TEST(Artifacts, EmptyTrajectoryIsRejected) {
  const auto dir = scratch("empty");
  EXPECT_THROW(emit_plot_data(rbm::Trajectory{}, dir / "p"), std::invalid_argument);
  RunReport no_tables;
  EXPECT_THROW(emit_plot_data(no_tables, dir / "p"), std::invalid_argument);
  fs::remove_all(dir);
}

TEST(Artifacts, PlotDataIsByteStable) {
  const auto dir = scratch("plot");
  const auto t = ramp(20);
  const auto svg = emit_plot_data(t, dir / "cost");
  EXPECT_EQ(svg, dir / "cost.svg");
  const auto bytes = slurp(svg), table = slurp(dir / "cost.csv");
  EXPECT_NE(bytes.find("<svg"), std::string::npos);
  (void)emit_plot_data(t, dir / "cost");
  EXPECT_EQ(slurp(svg), bytes);
  EXPECT_EQ(slurp(dir / "cost.csv"), table);
  fs::remove_all(dir);
}

TEST(Artifacts, PlotCsvFromTrajectoryRows) {
  const auto dir = scratch("plotcsv");
  const auto a = ramp(10), b = ramp(10);
  write_text(dir / "traj.csv", trajectory_csv({{0, &a}, {1, &b}}));
  plot_csv(dir / "traj.csv", dir / "out.svg");
  EXPECT_TRUE(fs::exists(dir / "out.svg"));
  EXPECT_EQ(companion_csv(dir / "out.svg"), dir / "out.csv");
  EXPECT_TRUE(fs::exists(dir / "out.csv"));
  EXPECT_THROW(plot_csv(dir / "missing.csv", dir / "o.svg"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Artifacts, SvgIsDeterministic) {
  const std::vector<PlotSeries> s{{"a", {0, 1, 2}, {1, 10, 1000}}};
  EXPECT_EQ(render_svg(s, "t", "x", "y"), render_svg(s, "t", "x", "y"));
}
