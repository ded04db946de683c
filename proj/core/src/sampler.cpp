#include "rbm/sampler.hpp"

#include "rbm/diffusion.hpp"
#include "rbm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace rbm::sampling {

using diffusion::NoiseSchedule;
using diffusion::ScoreModel;
using style::TerminalCost;

namespace {

[[noreturn]] void bad_name(std::string_view what, std::string_view name) {
  throw std::invalid_argument("unknown " + std::string(what) + " '" + std::string(name) + "'");
}

void check_setup(const SamplerConfig& config, const ScoreModel& score, const TerminalCost* cost,
                 const NoiseSchedule& schedule, bool proximal) {
  config.validate(proximal);
  if (config.num_steps != schedule.num_steps()) {
    throw std::invalid_argument("sampler: config num_steps does not match the schedule");
  }
  if (cost && cost->dimension() != score.dimension()) {
    throw std::invalid_argument("sampler: cost and score dimensions differ");
  }
}

Vector tweedie(const Vector& x, int t, const ScoreModel& score, const NoiseSchedule& schedule,
               const Context& context, SamplerCounters* counters) {
  if (counters) ++counters->score_evaluations;
  return diffusion::tweedie_posterior_mean(x, t, score, schedule, context);
}

}  // namespace

GradientMode parse_gradient_mode(std::string_view name) {
  if (name == "analytic") return GradientMode::Analytic;
  if (name == "finite-difference") return GradientMode::FiniteDifference;
  bad_name("gradient mode", name);
}

ProximalInit parse_proximal_init(std::string_view name) {
  if (name == "posterior-mean") return ProximalInit::PosteriorMean;
  if (name == "zero") return ProximalInit::Zero;
  bad_name("proximal init", name);
}

ProximalUpdate parse_proximal_update(std::string_view name) {
  if (name == "gradient") return ProximalUpdate::Gradient;
  if (name == "forward-backward") return ProximalUpdate::ForwardBackward;
  bad_name("proximal update", name);
}

NoiseEstimate parse_noise_estimate(std::string_view name) {
  if (name == "posterior-mean") return NoiseEstimate::PosteriorMean;
  if (name == "proximal") return NoiseEstimate::Proximal;
  bad_name("noise estimate", name);
}

std::string_view to_string(GradientMode v) {
  return v == GradientMode::Analytic ? "analytic" : "finite-difference";
}
std::string_view to_string(ProximalInit v) {
  return v == ProximalInit::PosteriorMean ? "posterior-mean" : "zero";
}
std::string_view to_string(ProximalUpdate v) {
  return v == ProximalUpdate::Gradient ? "gradient" : "forward-backward";
}
std::string_view to_string(NoiseEstimate v) {
  return v == NoiseEstimate::PosteriorMean ? "posterior-mean" : "proximal";
}

void SamplerConfig::validate(bool proximal) const {
  if (num_steps < 1) throw std::invalid_argument("sampler: num_steps must be >= 1");
  if (opt_steps < 0) throw std::invalid_argument("sampler: opt_steps must be >= 0");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("sampler: step_size must be > 0");
  }
  if (proximal_strength && (!(*proximal_strength > 0.0) || !std::isfinite(*proximal_strength))) {
    throw std::invalid_argument("sampler: proximal_strength must be > 0");
  }
  if (proximal && !proximal_strength) {
    throw std::invalid_argument("sampler: proximal_strength is required");
  }
}

Vector initial_noise(int dimension, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(dimension);
  for (int i = 0; i < dimension; ++i) x[i] = normal(rng);
  return x;
}

Vector control_gradient(const Vector& x, const Vector& u, int t, const ScoreModel& score,
                        const TerminalCost& cost, const NoiseSchedule& schedule,
                        GradientMode mode, const Context& context, SamplerCounters* counters) {
  const Vector shifted = x + u;
  if (mode == GradientMode::Analytic) {
    const double tc = static_cast<double>(t) / schedule.num_steps();
    if (auto ds = score.score_jacobian(shifted, tc, context)) {
      if (counters) ++counters->score_gradient_evaluations;
      const double abar = schedule.alpha_bar(t);
      const Vector x0 = tweedie(shifted, t, score, schedule, context, counters);
      Matrix jac = (1.0 - abar) * *ds;
      jac.diagonal().array() += 1.0;
      jac /= std::sqrt(abar);
      return jac.transpose() * cost.gradient(x0);
    }
  }
  // Central differences through the whole map u -> h(tweedie(x + u)).
  if (counters) ++counters->score_gradient_evaluations;
  const double h = 1e-4 * u.norm() + 1e-6;
  Vector grad(u.size());
  Vector probe = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + h;
    const double up = cost.value(tweedie(x + probe, t, score, schedule, context, counters));
    probe[i] = u[i] - h;
    const double down = cost.value(tweedie(x + probe, t, score, schedule, context, counters));
    probe[i] = u[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

ControlStep optimize_control_step(const State& x_t, const ScoreModel& score,
                                  const TerminalCost& cost, const NoiseSchedule& schedule,
                                  const SamplerConfig& config, const Context& context,
                                  SamplerObserver* observer, SamplerCounters* counters) {
  if (config.opt_steps < 0) throw std::invalid_argument("optimize_control_step: M < 0");
  require_dimension(x_t.values, score.dimension(), "optimize_control_step: state");
  const int t = x_t.time_index;

  Vector u = Vector::Zero(x_t.values.size());
  if (observer) observer->on_control_init(t, u);
  for (int m = 0; m < config.opt_steps; ++m) {
    Vector g;
    try {
      g = control_gradient(x_t.values, u, t, score, cost, schedule, config.gradient_mode, context,
                           counters);
    } catch (const NumericalFailure& e) {
      if (e.step()) throw;
      throw NumericalFailure(e.what(), t, m);
    }
    if (!g.allFinite()) {
      throw NumericalFailure("optimize_control_step: non-finite gradient", t, m);
    }
    u -= config.step_size * g;
    if (observer) {
      const Vector x0 = tweedie(x_t.values + u, t, score, schedule, context, nullptr);
      observer->on_inner_iteration(t, m, u, cost.value(x0));
    }
  }
  Vector x0_hat = tweedie(x_t.values + u, t, score, schedule, context, counters);
  return {std::move(u), std::move(x0_hat)};
}

Vector proximal_x0_solve(const Vector& x0_bar, const TerminalCost& cost,
                         const SamplerConfig& config, SamplerObserver* observer, int step) {
  if (!config.proximal_strength || !(*config.proximal_strength > 0.0)) {
    throw std::invalid_argument("proximal_x0_solve: lambda must be > 0");
  }
  if (config.opt_steps < 0) throw std::invalid_argument("proximal_x0_solve: M < 0");
  require_dimension(x0_bar, cost.dimension(), "proximal_x0_solve: x0_bar");
  const double lambda = *config.proximal_strength;

  Vector x = config.proximal_init == ProximalInit::PosteriorMean
                 ? Vector(x0_bar)
                 : Vector(Vector::Zero(x0_bar.size()));
  const double eta = config.step_size;
  const double capped = std::min(eta, 0.5 / lambda);
  for (int m = 0; m < config.opt_steps; ++m) {
    const Vector g = cost.gradient(x);
    if (config.proximal_update == ProximalUpdate::Gradient) {
      x -= capped * (g + 2.0 * lambda * (x - x0_bar));
    } else {
      x = (x - eta * g + 2.0 * eta * lambda * x0_bar) / (1.0 + 2.0 * eta * lambda);
    }
    if (!x.allFinite()) {
      throw NumericalFailure("proximal_x0_solve: non-finite iterate", step, m);
    }
    if (observer) {
      observer->on_inner_iteration(step, m, x,
                                   cost.value(x) + lambda * (x - x0_bar).squaredNorm());
    }
  }
  return x;
}

SamplingResult sample_uncontrolled(const SamplerConfig& config, const ScoreModel& score,
                                   const NoiseSchedule& schedule, const TerminalCost* cost,
                                   const Context& context) {
  check_setup(config, score, cost, schedule, false);
  const int T = schedule.num_steps();
  SamplingResult out;
  auto& traj = out.trajectory;
  traj.states.reserve(static_cast<std::size_t>(T) + 1);
  traj.controls.reserve(static_cast<std::size_t>(T));

  Vector x = initial_noise(score.dimension(), config.seed);
  traj.states.push_back({x, T});
  for (int t = T; t >= 1; --t) {
    const Vector x0 = tweedie(x, t, score, schedule, context, &out.counters);
    if (cost) traj.costs.push_back(cost->value(x0));
    State next = diffusion::ddim_step(x, x0, t, t - 1, schedule);
    if (!next.values.allFinite()) {
      throw AbortedTrajectory("sample_uncontrolled: non-finite state", t, x);
    }
    x = next.values;
    traj.controls.push_back(Vector::Zero(x.size()));
    traj.states.push_back(std::move(next));
  }
  if (cost) traj.costs.push_back(cost->value(x));
  return out;
}

SamplingResult run_algorithm1(const SamplerConfig& config, const ScoreModel& score,
                              const TerminalCost& cost, const NoiseSchedule& schedule,
                              const Context& context, SamplerObserver* observer) {
  check_setup(config, score, &cost, schedule, false);
  const int T = schedule.num_steps();
  SamplingResult out;
  auto& traj = out.trajectory;
  traj.states.reserve(static_cast<std::size_t>(T) + 1);
  traj.controls.reserve(static_cast<std::size_t>(T));
  traj.costs.reserve(static_cast<std::size_t>(T) + 1);

  Vector x = initial_noise(score.dimension(), config.seed);
  traj.states.push_back({x, T});
  for (int t = T; t >= 1; --t) {
    ControlStep ctl = optimize_control_step({x, t}, score, cost, schedule, config, context,
                                            observer, &out.counters);
    const Vector x_star = x + ctl.control;
    const double c = cost.value(ctl.x0_hat);
    State next = diffusion::ddim_step(x_star, ctl.x0_hat, t, t - 1, schedule);
    if (!next.values.allFinite()) {
      throw AbortedTrajectory("run_algorithm1: non-finite state", t, x);
    }
    x = next.values;
    traj.costs.push_back(c);
    if (observer) observer->on_step(next, ctl.control, c);
    traj.controls.push_back(std::move(ctl.control));
    traj.states.push_back(std::move(next));
  }
  traj.costs.push_back(cost.value(x));
  return out;
}

SamplingResult run_algorithm2(const SamplerConfig& config, const ScoreModel& score,
                              const TerminalCost& cost, const NoiseSchedule& schedule,
                              const Context& context, SamplerObserver* observer) {
  check_setup(config, score, &cost, schedule, true);
  const int T = schedule.num_steps();
  SamplingResult out;
  auto& traj = out.trajectory;
  traj.states.reserve(static_cast<std::size_t>(T) + 1);
  traj.controls.reserve(static_cast<std::size_t>(T));
  traj.costs.reserve(static_cast<std::size_t>(T) + 1);

  Vector x = initial_noise(score.dimension(), config.seed);
  traj.states.push_back({x, T});
  for (int t = T; t >= 1; --t) {
    const Vector x0_bar = tweedie(x, t, score, schedule, context, &out.counters);
    if (observer) observer->on_control_init(t, Vector::Zero(x.size()));
    const Vector x0 = proximal_x0_solve(x0_bar, cost, config, observer, t);
    const Vector& noise_source =
        config.noise_estimate == NoiseEstimate::PosteriorMean ? x0_bar : x0;
    const Vector eps = diffusion::predicted_noise(x, noise_source, t, schedule);
    State next = diffusion::ddim_step_with_noise(x0, eps, t - 1, schedule);
    if (!next.values.allFinite()) {
      throw AbortedTrajectory("run_algorithm2: non-finite state", t, x);
    }
    x = next.values;
    const double c = cost.value(x0);
    traj.costs.push_back(c);
    Vector shift = x0 - x0_bar;
    if (observer) observer->on_step(next, shift, c);
    traj.controls.push_back(std::move(shift));
    traj.states.push_back(std::move(next));
  }
  traj.costs.push_back(cost.value(x));
  return out;
}

}  // namespace rbm::sampling
