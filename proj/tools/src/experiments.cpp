#include "socdiffuse/experiments.hpp"

#include "socdiffuse/artifacts.hpp"
#include "socdiffuse/checks.hpp"
#include "socdiffuse/sampling.hpp"

#include <rbm/matrix_io.hpp>

#include <chrono>
#include <cmath>

namespace socdiffuse {

using namespace rbm;

namespace {

Vector or_default(const Vector& v, std::initializer_list<double> fallback) {
  if (v.size() > 0) return v;
  Vector out(static_cast<Eigen::Index>(fallback.size()));
  Eigen::Index i = 0;
  for (double x : fallback) out[i++] = x;
  return out;
}

Matrix matrix_or(const Matrix& m, Matrix fallback) { return m.size() > 0 ? m : fallback; }

std::vector<double> default_gammas() { return {1e1, 1e2, 1e3, 1e4, 1e5, 1e6}; }

void write_timing(const std::filesystem::path& dir, double seconds) {
  write_text(dir / "timing.json", "{\n  \"wall_clock_seconds\": " + format_double(seconds) + "\n}\n");
}

std::vector<double> mean_cost_curve(const std::vector<SeedRun>& runs, bool baseline) {
  const auto& first = (baseline ? runs.front().baseline : runs.front().controlled).trajectory;
  std::vector<double> curve(first.costs.size(), 0.0);
  for (const auto& run : runs) {
    const auto& costs = (baseline ? run.baseline : run.controlled).trajectory.costs;
    for (std::size_t k = 0; k < curve.size(); ++k) curve[k] += costs[k] / runs.size();
  }
  return curve;
}

void sample(RunReport& report, const ExperimentConfig& c, const std::filesystem::path& dir,
            int threads) {
  const bool alg2 = c.kind == ExperimentKind::SampleAlg2;
  const auto setup = make_sampling_setup(c);
  const auto runs = run_seeds(alg2 ? Algorithm::Alg2 : Algorithm::Alg1, c.sampler, setup, c.seeds, threads);

  std::vector<SeededTrajectory> controlled, baseline;
  for (const auto& run : runs) {
    controlled.push_back({run.seed, &run.controlled.trajectory});
    baseline.push_back({run.seed, &run.baseline.trajectory});
    report.seeds.push_back({run.seed, run.controlled.trajectory.costs.back(),
                            run.baseline.trajectory.costs.back()});
  }
  write_text(dir / "trajectories.csv", trajectory_csv(controlled));
  write_text(dir / "baseline_trajectories.csv", trajectory_csv(baseline));
  report.artifacts.push_back("trajectories.csv");
  report.artifacts.push_back("baseline_trajectories.csv");

  const double cost = mean_terminal_cost(runs, false);
  const double unc = mean_terminal_cost(runs, true);
  report.metrics.emplace_back("mean_terminal_cost", cost);
  report.metrics.emplace_back("baseline_mean_terminal_cost", unc);
  report.metrics.emplace_back("mean_feature_error", mean_feature_error(runs, false));

  if (!alg2 && c.sampler.opt_steps == 0) {
    long bad = 0;
    for (const auto& run : runs) {
      for (std::size_t i = 0; i < run.controlled.trajectory.states.size(); ++i) {
        const auto& a = run.controlled.trajectory.states[i].values;
        const auto& b = run.baseline.trajectory.states[i].values;
        bad += (a.array() == b.array()).all() ? 0 : 1;
      }
    }
    report.add(check_equal("M=0 vs uncontrolled DDIM, mismatching states", static_cast<double>(bad), 0.0));
  } else {
    report.add(check_less("mean terminal cost / uncontrolled", cost / unc, 0.2));
  }
  if (alg2) {
    long grads = 0;
    for (const auto& run : runs) grads += run.controlled.counters.score_gradient_evaluations;
    report.add(check_equal("score-gradient evaluations", static_cast<double>(grads), 0.0));
  }

  const auto steps = runs.front().controlled.trajectory.states;
  PlotSeries ctl{"controlled", {}, mean_cost_curve(runs, false)};
  PlotSeries base{"uncontrolled", {}, mean_cost_curve(runs, true)};
  Table curve{"cost_vs_step.csv", {"step", "controlled_mean_cost", "uncontrolled_mean_cost"}, {}};
  for (std::size_t k = 0; k < steps.size(); ++k) {
    ctl.x.push_back(steps[k].time_index);
    base.x.push_back(steps[k].time_index);
    curve.rows.push_back({static_cast<double>(steps[k].time_index), ctl.y[k], base.y[k]});
  }
  write_text(dir / "cost_vs_step.svg",
             render_svg({ctl, base}, to_string(c.kind) + ": seed-averaged cost", "step", "terminal cost"));
  report.artifacts.push_back("cost_vs_step.svg");
  report.tables.push_back(std::move(curve));
}

}  // namespace

RunReport run_experiment(ExperimentConfig c, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (options.seed) rebase_seeds(c, *options.seed);
  if (options.out_dir) c.output_dir = options.out_dir->string();
  const std::filesystem::path dir = c.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  RunReport report;
  report.name = to_string(c.kind);
  report.seed = c.seeds.front();
  report.config_echo = echo_config(c);
  const std::uint64_t seed = c.seeds.front();
  const auto& ctl = c.control;

  switch (c.kind) {
    case ExperimentKind::SampleAlg1:
    case ExperimentKind::SampleAlg2:
      sample(report, c, dir, options.threads);
      break;
    case ExperimentKind::VerifyBridge:
      checks::bridge(report, or_default(ctl.x0, {1.0, -1.0}), or_default(ctl.x1, {0.0, 0.0}), ctl.dt);
      break;
    case ExperimentKind::VerifyLq: {
      Matrix a_default(2, 2);
      a_default << 1.0, 0.0, 0.0, 2.0;
      const Matrix a = matrix_or(c.extractor.matrix, a_default);
      const Vector y1 = or_default(c.extractor.reference, {1.0, 2.0});
      const Vector x0 = or_default(ctl.x0, {0.5, -1.0});
      const double gamma = ctl.gamma.is_infinite() ? 10.0 : ctl.gamma.value();
      checks::style_shooting(report, a, y1, x0, ctl.t0, gamma, ctl.grid_points);
      checks::gamma_sweep(report, a, y1, x0, ctl.t0, ctl.gammas.empty() ? default_gammas() : ctl.gammas);
      checks::terminal_satisfaction(report, a, y1, x0, ctl.dt, "infinite-gamma");
      checks::reduction_identity(report, seed);
      break;
    }
    case ExperimentKind::VerifyProp2: {
      const Matrix a = matrix_or(c.extractor.matrix, Matrix::Ones(1, 1));
      const Vector y1 = or_default(c.extractor.reference, {0.0});
      const Vector x0 = or_default(ctl.x0, {1.0});
      const double gamma = ctl.gamma.is_infinite() ? 1.0 : ctl.gamma.value();
      checks::prop2(report, a, y1, x0, gamma, ctl.grid_points, "configured instance");
      checks::prop2_scalar_terminal(report);
      break;
    }
    case ExperimentKind::VerifyHjb:
      checks::hjb(report, or_default(ctl.x1, {0.5, -0.5}));
      break;
    case ExperimentKind::VerifyAfa:
      checks::afa(report, c.afa, seed);
      break;
    case ExperimentKind::SweepGamma: {
      Matrix a_default(2, 2);
      a_default << 1.0, 0.0, 0.0, 2.0;
      checks::gamma_sweep(report, matrix_or(c.extractor.matrix, a_default),
                          or_default(c.extractor.reference, {1.0, 2.0}),
                          or_default(ctl.x0, {0.5, -1.0}), ctl.t0,
                          ctl.gammas.empty() ? default_gammas() : ctl.gammas);
      emit_plot_data(report, dir / "gamma_sweep");
      report.artifacts.push_back("gamma_sweep.svg");
      break;
    }
  }

  write_report(report, dir);
  write_timing(dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return report;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"diffusion-core", "style-features",
                                                 "optimal-control", "soc-sampler", "afa", "all"};
  return names;
}

RunReport verify_suite(const std::string& name, std::uint64_t seed,
                       const std::filesystem::path& out_dir, int threads) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw UnknownSuite("unknown suite '" + name + "' (known: " + known + ")");
  }
  const auto start = std::chrono::steady_clock::now();
  const bool all = name == "all";
  RunReport report;
  report.name = name;
  report.seed = seed;

  if (all || name == "diffusion-core") checks::diffusion_core(report, seed);
  if (all || name == "style-features") checks::style_features(report, seed);
  if (all || name == "optimal-control") {
    Vector x0(2), x1 = Vector::Zero(2);
    x0 << 1.0, -1.0;
    checks::bridge(report, x0, x1, 1e-3);
    checks::bridge_noise(report, x0, x1, 1e-4, 10000, seed);

    Matrix a(2, 2);
    a << 1.0, 0.0, 0.0, 2.0;
    Vector y1(2), start_state(2);
    y1 << 1.0, 2.0;
    start_state << 0.5, -1.0;
    checks::style_shooting(report, a, y1, start_state, 0.0, 10.0, 100);
    checks::style_shooting(report, Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 1.0),
                           Vector::Constant(1, -0.5), 0.25, 3.0, 100);
    checks::gamma_sweep(report, a, y1, start_state, 0.3, default_gammas());
    checks::terminal_satisfaction(report, a, y1, start_state, 1e-3, "invertible A");

    Matrix wide(1, 4);
    wide << 1.0, -0.5, 0.25, 2.0;
    Vector wide_x0(4);
    wide_x0 << 1.0, 2.0, -1.0, 0.5;
    checks::terminal_satisfaction(report, wide, Vector::Constant(1, 1.0), wide_x0, 1e-3,
                                  "wide A (k=1, d=4)");
    checks::reduction_identity(report, seed);

    checks::prop2(report, Matrix::Ones(1, 1), Vector::Zero(1), Vector::Ones(1), 1.0, 100, "scalar");
    Matrix a2(2, 2);
    a2 << 1.0, 0.5, 0.0, 1.0;
    Vector y2(2), x2(2);
    y2 << 1.0, -1.0;
    x2 << 0.5, 1.0;
    checks::prop2(report, a2, y2, x2, 2.0, 100, "d=2");
    checks::prop2_scalar_terminal(report);
    Vector hjb_target(2);
    hjb_target << 0.5, -0.5;
    checks::hjb(report, hjb_target);
  }
  if (all || name == "soc-sampler") checks::soc_sampler(report, seed, 200, threads);
  if (all || name == "afa") checks::afa(report, AfaSpec{}, seed);

  write_report(report, out_dir);
  write_timing(out_dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return report;
}

}  // namespace socdiffuse
