#include "socdiffuse/artifacts.hpp"

#include <rbm/matrix_io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace socdiffuse {

using rbm::format_double;

std::string trajectory_csv(const std::vector<SeededTrajectory>& runs) {
  if (runs.empty() || !runs.front().trajectory || runs.front().trajectory->empty()) {
    throw std::invalid_argument("trajectory_csv: no trajectory");
  }
  const auto d = runs.front().trajectory->states.front().values.size();
  std::ostringstream o;
  o << "seed,step";
  for (Eigen::Index i = 0; i < d; ++i) o << ",x_" << i;
  for (Eigen::Index i = 0; i < d; ++i) o << ",u_" << i;
  o << ",terminal_cost\n";
  for (const auto& run : runs) {
    const auto& tr = *run.trajectory;
    tr.validate();
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const auto& s = tr.states[k];
      o << run.seed << ',' << s.time_index;
      for (Eigen::Index i = 0; i < d; ++i) o << ',' << format_double(s.values[i]);
      for (Eigen::Index i = 0; i < d; ++i) {
        o << ',' << format_double(k < tr.controls.size() ? tr.controls[k][i] : 0.0);
      }
      o << ',' << (tr.costs.empty() ? std::string("nan") : format_double(tr.costs[k])) << '\n';
    }
  }
  return o.str();
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo, hi;
  bool log;

  static Axis fit(const std::vector<double>& values) {
    double lo = 1e300, hi = -1e300;
    bool positive = true;
    for (double v : values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      positive = positive && v > 0.0;
    }
    if (lo > hi) return {0.0, 1.0, false};
    const bool log = positive && hi / lo > 100.0;
    if (log) return {std::log10(lo), std::log10(hi) + (hi == lo ? 1.0 : 0.0), true};
    if (hi == lo) return {lo - 0.5, hi + 0.5, false};
    return {lo, hi, false};
  }
  double map(double v) const { return ((log ? std::log10(v) : v) - lo) / (hi - lo); }
  std::string label(double frac) const {
    const double v = lo + frac * (hi - lo);
    return format_short(log ? std::pow(10.0, v) : v);
  }
  static std::string format_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("render_svg: no series");
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: ragged series");
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  if (xs.empty()) throw std::invalid_argument("render_svg: empty series");
  const Axis ax = Axis::fit(xs), ay = Axis::fit(ys);
  const double left = 70, right = 620, top = 40, bottom = 350;
  const auto px = [&](double v) { return left + ax.map(v) * (right - left); };
  const auto py = [&](double v) { return bottom - ay.map(v) * (bottom - top); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  o << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  o << "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\""
    << bottom - top << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    o << "<text x=\"" << fixed(left + f * (right - left)) << "\" y=\"366\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"10\">" << ax.label(f) << "</text>\n";
    o << "<text x=\"64\" y=\"" << fixed(bottom - f * (bottom - top) + 3)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << ay.label(f)
      << "</text>\n";
  }
  o << "<text x=\"345\" y=\"388\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << escape(x_label) << (ax.log ? " (log)" : "") << "</text>\n";
  o << "<text x=\"14\" y=\"195\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
    << "transform=\"rotate(-90 14 195)\">" << escape(y_label) << (ay.log ? " (log)" : "")
    << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double x = series[s].x[i], y = series[s].y[i];
      if (!std::isfinite(x) || !std::isfinite(y) || (ax.log && x <= 0) || (ay.log && y <= 0)) continue;
      o << (first ? "" : " ") << fixed(px(x)) << ',' << fixed(py(y));
      first = false;
    }
    o << "\"/>\n";
    o << "<text x=\"" << right - 5 << "\" y=\"" << top + 15 + 14 * s
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
      << "\">" << escape(series[s].name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::filesystem::path companion_csv(const std::filesystem::path& svg) {
  auto p = svg;
  if (p.extension() == ".csv") return p.string() + ".csv";
  p.replace_extension(".csv");
  return p;
}

std::filesystem::path emit_plot_data(const rbm::Trajectory& trajectory,
                                     const std::filesystem::path& stem) {
  if (trajectory.empty()) throw std::invalid_argument("emit_plot_data: empty trajectory");
  PlotSeries s;
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    s.x.push_back(trajectory.states[k].time_index);
    s.y.push_back(trajectory.costs.empty() ? trajectory.states[k].values.norm() : trajectory.costs[k]);
  }
  s.name = trajectory.costs.empty() ? "|x|" : "terminal cost";
  const std::filesystem::path svg = stem.string() + ".svg";
  write_text(svg, render_svg({s}, "trajectory", "step", s.name));
  write_text(stem.string() + ".csv", trajectory_csv({{0, &trajectory}}));
  return svg;
}

std::filesystem::path emit_plot_data(const RunReport& report, const std::filesystem::path& stem) {
  if (report.tables.empty()) throw std::invalid_argument("emit_plot_data: report has no tables");
  std::vector<PlotSeries> series;
  for (const auto& t : report.tables) {
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      PlotSeries s{t.file + ":" + t.header[c], {}, {}};
      for (const auto& row : t.rows) {
        s.x.push_back(row[0]);
        s.y.push_back(row[c]);
      }
      series.push_back(std::move(s));
    }
  }
  const std::filesystem::path svg = stem.string() + ".svg";
  write_text(svg, render_svg(series, report.name, report.tables.front().header.front(), "value"));
  std::ostringstream o;
  o << "series,x,y\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << s.name << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
    }
  }
  write_text(stem.string() + ".csv", o.str());
  return svg;
}

void plot_csv(const std::filesystem::path& csv, const std::filesystem::path& out) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read " + csv.string());
  std::string header_line;
  if (!std::getline(in, header_line)) throw std::invalid_argument("plot: empty csv");
  std::vector<std::string> header;
  {
    std::istringstream h(header_line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  std::ostringstream body;
  body << in.rdbuf();
  const rbm::Matrix data = rbm::parse_matrix_csv(body.str());
  if (data.cols() != static_cast<Eigen::Index>(header.size()) || header.size() < 2) {
    throw std::invalid_argument("plot: header does not match the data");
  }

  std::vector<PlotSeries> series;
  std::string x_label = header[0], y_label = "value";
  const auto step_col = std::find(header.begin(), header.end(), "step");
  const auto cost_col = std::find(header.begin(), header.end(), "terminal_cost");
  if (header[0] == "seed" && step_col != header.end() && cost_col != header.end()) {
    const auto sc = step_col - header.begin(), cc = cost_col - header.begin();
    std::map<long, std::pair<double, int>> by_step;
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      auto& acc = by_step[static_cast<long>(data(r, sc))];
      acc.first += data(r, cc);
      acc.second += 1;
    }
    PlotSeries s{"mean terminal cost", {}, {}};
    for (auto it = by_step.rbegin(); it != by_step.rend(); ++it) {
      s.x.push_back(static_cast<double>(it->first));
      s.y.push_back(it->second.first / it->second.second);
    }
    series.push_back(std::move(s));
    x_label = "step";
    y_label = "terminal cost";
  } else {
    for (std::size_t c = 1; c < header.size(); ++c) {
      PlotSeries s{header[c], {}, {}};
      for (Eigen::Index r = 0; r < data.rows(); ++r) {
        s.x.push_back(data(r, 0));
        s.y.push_back(data(r, static_cast<Eigen::Index>(c)));
      }
      series.push_back(std::move(s));
    }
  }
  write_text(out, render_svg(series, csv.filename().string(), x_label, y_label));
  std::ostringstream o;
  o << "series,x,y\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << s.name << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
    }
  }
  write_text(companion_csv(out), o.str());
}

}  // namespace socdiffuse
