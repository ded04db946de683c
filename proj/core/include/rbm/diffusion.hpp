#pragma once

#include "rbm/schedule.hpp"
#include "rbm/score.hpp"
#include "rbm/types.hpp"

#include <functional>
#include <string_view>

namespace rbm::diffusion {

/// Forward SDE coefficients dX = f(X, t) dt + g(X, t) dW. Defaults to the
/// Ornstein-Uhlenbeck pair f = -x, g = sqrt(2).
struct SdeCoefficients {
  std::function<Vector(const Vector&, double)> drift = [](const Vector& x, double) -> Vector {
    return -x;
  };
  std::function<double(const Vector&, double)> volatility = [](const Vector&, double) {
    return std::sqrt(2.0);
  };
};

enum class DriftMode { Sde, ProbabilityFlow, FlowRemark };

DriftMode parse_drift_mode(std::string_view name);

/// sqrt(abar_t) x0 + sqrt(1 - abar_t) noise.
State forward_marginal_sample(const Vector& x0, int t, const Vector& noise,
                              const NoiseSchedule& schedule);

/// t x0 + (1 - t) noise, t in [0, 1].
Vector flow_path_sample(const Vector& x0, double t, const Vector& noise);

/// Tweedie estimate of E[X_0 | X_t = x] under the variance-preserving
/// schedule. The score is queried at continuous time t / T.
Vector tweedie_posterior_mean(const Vector& x, int t, const ScoreModel& score,
                              const NoiseSchedule& schedule, const Context& context = {});

/// Same, from a precomputed score value. Throws NumericalFailure on a
/// non-finite score.
Vector tweedie_from_score(const Vector& x, const Vector& score_value, double alpha_bar,
                          std::optional<int> step = std::nullopt);

/// E[X_1 | X_t = x] on the flow path, using the score at flow time 1 - t.
/// Throws SingularTime for t >= 1.
Vector flow_posterior_mean(const Vector& x, double t, const ScoreModel& score,
                           const Context& context = {});

/// Noise estimate (x_t - sqrt(abar_t) x0_hat) / sqrt(1 - abar_t).
Vector predicted_noise(const Vector& x_t, const Vector& x0_hat, int t,
                       const NoiseSchedule& schedule);

/// Deterministic DDIM update from index t to t_prev < t.
State ddim_step(const Vector& x_t, const Vector& x0_hat, int t, int t_prev,
                const NoiseSchedule& schedule);

/// DDIM update with an externally supplied noise estimate.
State ddim_step_with_noise(const Vector& x0_hat, const Vector& noise_hat, int t_prev,
                           const NoiseSchedule& schedule);

/// Drift of the reverse dynamics at continuous time t:
///  - Sde:             f - g^2 s(x, t)
///  - ProbabilityFlow: f - g^2 s(x, t) / 2
///  - FlowRemark:      t/(1-t)^2 x + t^2/(1-t)^2 s(x, 1-t)   (flow-path score)
Vector reverse_drift(const Vector& x, double t, const ScoreModel& score, DriftMode mode,
                     const SdeCoefficients& sde = {}, const Context& context = {});

}  // namespace rbm::diffusion
