#pragma once

#include "rbm/features.hpp"
#include "rbm/schedule.hpp"
#include "rbm/score.hpp"
#include "rbm/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

/// Controlled reverse-diffusion samplers.
///
/// Both algorithms walk t = T..1 with deterministic DDIM steps. Algorithm 1
/// re-optimizes an additive control u on every step by gradient descent
/// through the Tweedie estimate; Algorithm 2 instead solves a proximal
/// problem on the clean estimate and never differentiates the score.
namespace rbm::sampling {

enum class GradientMode { Analytic, FiniteDifference };

/// Starting point of the proximal iteration.
enum class ProximalInit { PosteriorMean, Zero };

/// Inner update of the proximal iteration. `Gradient` is plain gradient
/// descent on the full objective with step min(eta, 1/(2 lambda));
/// `ForwardBackward` takes a gradient step on the style cost and an exact
/// proximal step on the penalty.
enum class ProximalUpdate { Gradient, ForwardBackward };

/// Where Algorithm 2 takes its DDIM noise estimate from: the model's
/// posterior mean at x_t, or the optimized clean estimate itself.
enum class NoiseEstimate { PosteriorMean, Proximal };

GradientMode parse_gradient_mode(std::string_view name);
ProximalInit parse_proximal_init(std::string_view name);
ProximalUpdate parse_proximal_update(std::string_view name);
NoiseEstimate parse_noise_estimate(std::string_view name);
std::string_view to_string(GradientMode v);
std::string_view to_string(ProximalInit v);
std::string_view to_string(ProximalUpdate v);
std::string_view to_string(NoiseEstimate v);

struct SamplerConfig {
  int num_steps = 50;
  double step_size = 0.1;  ///< eta
  int opt_steps = 3;       ///< M
  std::optional<double> proximal_strength;  ///< lambda, Algorithm 2 only
  GradientMode gradient_mode = GradientMode::Analytic;
  std::uint64_t seed = 0;

  ProximalInit proximal_init = ProximalInit::PosteriorMean;
  ProximalUpdate proximal_update = ProximalUpdate::Gradient;
  NoiseEstimate noise_estimate = NoiseEstimate::PosteriorMean;

  /// Throws std::invalid_argument. `proximal` additionally requires lambda > 0.
  void validate(bool proximal = false) const;

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// Instrumentation hooks. Default implementations do nothing.
class SamplerObserver {
 public:
  virtual ~SamplerObserver() = default;
  /// Called once per outer step with the freshly initialized control.
  virtual void on_control_init(int /*step*/, const Vector& /*u*/) {}
  /// Called after every inner iteration with the current iterate and cost.
  virtual void on_inner_iteration(int /*step*/, int /*iteration*/, const Vector& /*iterate*/,
                                  double /*cost*/) {}
  /// Called after every outer step with the new state.
  virtual void on_step(const State& /*state*/, const Vector& /*control*/, double /*cost*/) {}
};

struct SamplerCounters {
  long score_evaluations = 0;
  /// Score-Jacobian products plus finite-difference sweeps through the score.
  long score_gradient_evaluations = 0;
};

struct SamplingResult {
  Trajectory trajectory;
  SamplerCounters counters;
};

struct ControlStep {
  Vector control;  ///< u*
  Vector x0_hat;   ///< Tweedie estimate at x_t + u*
};

/// Inner loop of Algorithm 1 at step `t`: starting from u = 0, takes exactly
/// M gradient steps u <- u - eta grad_u h(tweedie(x_t + u)).
ControlStep optimize_control_step(const State& x_t, const diffusion::ScoreModel& score,
                                  const style::TerminalCost& cost,
                                  const diffusion::NoiseSchedule& schedule,
                                  const SamplerConfig& config, const Context& context = {},
                                  SamplerObserver* observer = nullptr,
                                  SamplerCounters* counters = nullptr);

/// grad_u h(tweedie(x + u)) at step t, by the chain rule
/// (I + (1 - abar) ds/dx)^T / sqrt(abar) grad h, or by central differences
/// with step 1e-4 |u| + 1e-6.
Vector control_gradient(const Vector& x, const Vector& u, int t,
                        const diffusion::ScoreModel& score, const style::TerminalCost& cost,
                        const diffusion::NoiseSchedule& schedule, GradientMode mode,
                        const Context& context = {}, SamplerCounters* counters = nullptr);

/// argmin_x0 h(x0) + lambda |x0 - x0_bar|^2 approximated by M inner steps.
Vector proximal_x0_solve(const Vector& x0_bar, const style::TerminalCost& cost,
                         const SamplerConfig& config, SamplerObserver* observer = nullptr,
                         int step = 0);

/// Uncontrolled deterministic DDIM from x_T ~ N(0, I) drawn with the seed.
/// `cost`, when given, is logged but never acted upon.
SamplingResult sample_uncontrolled(const SamplerConfig& config, const diffusion::ScoreModel& score,
                                   const diffusion::NoiseSchedule& schedule,
                                   const style::TerminalCost* cost = nullptr,
                                   const Context& context = {});

SamplingResult run_algorithm1(const SamplerConfig& config, const diffusion::ScoreModel& score,
                              const style::TerminalCost& cost,
                              const diffusion::NoiseSchedule& schedule,
                              const Context& context = {}, SamplerObserver* observer = nullptr);

/// Controls recorded for Algorithm 2 are the shifts x0 - x0_bar applied to
/// the clean estimate.
SamplingResult run_algorithm2(const SamplerConfig& config, const diffusion::ScoreModel& score,
                              const style::TerminalCost& cost,
                              const diffusion::NoiseSchedule& schedule,
                              const Context& context = {}, SamplerObserver* observer = nullptr);

/// The x_T draw shared by all samplers.
Vector initial_noise(int dimension, std::uint64_t seed);

}  // namespace rbm::sampling
