#include "rbm/diffusion.hpp"

#include "rbm/errors.hpp"

#include <cmath>
#include <string>

namespace rbm::diffusion {

DriftMode parse_drift_mode(std::string_view name) {
  if (name == "sde") return DriftMode::Sde;
  if (name == "probability-flow") return DriftMode::ProbabilityFlow;
  if (name == "flow-remark") return DriftMode::FlowRemark;
  throw std::invalid_argument("unknown drift mode '" + std::string(name) + "'");
}

State forward_marginal_sample(const Vector& x0, int t, const Vector& noise,
                              const NoiseSchedule& schedule) {
  require_dimension(noise, x0.size(), "forward_marginal_sample: noise");
  const double abar = schedule.alpha_bar(t);
  return {std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * noise, t};
}

Vector flow_path_sample(const Vector& x0, double t, const Vector& noise) {
  if (!(t >= 0.0) || !(t <= 1.0)) throw std::invalid_argument("flow_path_sample: t outside [0, 1]");
  require_dimension(noise, x0.size(), "flow_path_sample: noise");
  return t * x0 + (1.0 - t) * noise;
}

Vector tweedie_from_score(const Vector& x, const Vector& score_value, double alpha_bar,
                          std::optional<int> step) {
  if (!score_value.allFinite()) {
    throw NumericalFailure("tweedie_posterior_mean: non-finite score", step);
  }
  const double root = std::sqrt(alpha_bar);
  return x / root + ((1.0 - alpha_bar) / root) * score_value;
}

Vector tweedie_posterior_mean(const Vector& x, int t, const ScoreModel& score,
                              const NoiseSchedule& schedule, const Context& context) {
  const double abar = schedule.alpha_bar(t);
  const double time = static_cast<double>(t) / schedule.num_steps();
  return tweedie_from_score(x, score.score(x, time, context), abar, t);
}

Vector flow_posterior_mean(const Vector& x, double t, const ScoreModel& score,
                           const Context& context) {
  if (!(t < 1.0)) throw SingularTime("flow_posterior_mean: t must be < 1");
  const Vector s = score.score(x, 1.0 - t, context);
  if (!s.allFinite()) throw NumericalFailure("flow_posterior_mean: non-finite score");
  return x / (1.0 - t) + (t * t / (1.0 - t)) * s;
}

Vector predicted_noise(const Vector& x_t, const Vector& x0_hat, int t,
                       const NoiseSchedule& schedule) {
  require_dimension(x0_hat, x_t.size(), "predicted_noise: x0_hat");
  const double abar = schedule.alpha_bar(t);
  if (abar == 1.0) {
    if (x0_hat != x_t) throw SingularDenoise("ddim: abar_t = 1 but x0_hat differs from x_t");
    return Vector::Zero(x_t.size());
  }
  return (x_t - std::sqrt(abar) * x0_hat) / std::sqrt(1.0 - abar);
}

State ddim_step_with_noise(const Vector& x0_hat, const Vector& noise_hat, int t_prev,
                           const NoiseSchedule& schedule) {
  require_dimension(noise_hat, x0_hat.size(), "ddim_step: noise estimate");
  const double abar_prev = schedule.alpha_bar(t_prev);
  return {std::sqrt(abar_prev) * x0_hat + std::sqrt(1.0 - abar_prev) * noise_hat, t_prev};
}

State ddim_step(const Vector& x_t, const Vector& x0_hat, int t, int t_prev,
                const NoiseSchedule& schedule) {
  if (!(t_prev < t)) throw std::invalid_argument("ddim_step: t_prev must be < t");
  return ddim_step_with_noise(x0_hat, predicted_noise(x_t, x0_hat, t, schedule), t_prev,
                              schedule);
}

Vector reverse_drift(const Vector& x, double t, const ScoreModel& score, DriftMode mode,
                     const SdeCoefficients& sde, const Context& context) {
  if (mode == DriftMode::FlowRemark) {
    if (!(t < 1.0)) throw SingularTime("reverse_drift(flow-remark): t must be < 1");
    const double one_minus = 1.0 - t;
    const Vector s = score.score(x, one_minus, context);
    return (t / (one_minus * one_minus)) * x + (t * t / (one_minus * one_minus)) * s;
  }
  const double g = sde.volatility(x, t);
  if (!(g >= 0.0)) throw std::domain_error("reverse_drift: volatility must be >= 0");
  const double weight = mode == DriftMode::Sde ? g * g : 0.5 * g * g;
  return sde.drift(x, t) - weight * score.score(x, t, context);
}

}  // namespace rbm::diffusion
