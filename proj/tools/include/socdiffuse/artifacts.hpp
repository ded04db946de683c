#pragma once

#include "socdiffuse/report.hpp"

#include <rbm/types.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace socdiffuse {

struct SeededTrajectory {
  std::uint64_t seed;
  const rbm::Trajectory* trajectory;
};

/// Columns: seed, step, x_0..x_{d-1}, u_0..u_{d-1}, terminal_cost. One row
/// per state; the control column holds the control applied from that state
/// (zero on the final row). Values use 17 significant digits.
std::string trajectory_csv(const std::vector<SeededTrajectory>& runs);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Fixed 640x400 viewport, no timestamps: identical input gives identical
/// bytes. Axes switch to log10 when every value is positive and the range
/// spans more than two decades.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

/// Writes `<stem>.svg` (cost against step, or the state norm when no costs
/// were recorded) and `<stem>.csv` (the trajectory rows). Returns the SVG
/// path. Throws std::invalid_argument for an empty trajectory.
std::filesystem::path emit_plot_data(const rbm::Trajectory& trajectory,
                                     const std::filesystem::path& stem);

/// Plots every table of the report (first column against the others).
/// Writes `<stem>.svg` and `<stem>.csv` (the checks). Throws
/// std::invalid_argument when the report has no tables.
std::filesystem::path emit_plot_data(const RunReport& report, const std::filesystem::path& stem);

/// `socdiffuse plot`: a trajectory CSV becomes the seed-averaged cost per
/// step; any other numeric CSV plots column 0 against the rest. Writes the
/// SVG at `out` and the plotted series as CSV next to it.
void plot_csv(const std::filesystem::path& csv, const std::filesystem::path& out);

/// Companion CSV path for an SVG output path.
std::filesystem::path companion_csv(const std::filesystem::path& svg);

}  // namespace socdiffuse
