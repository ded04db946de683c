#include "rbm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rbm::diffusion {

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "linear-beta" || name == "linear") return ScheduleKind::LinearBeta;
  if (name == "cosine") return ScheduleKind::Cosine;
  throw std::invalid_argument("unknown schedule kind '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::LinearBeta ? "linear-beta" : "cosine";
}

namespace {

std::vector<double> linear_beta_alpha_bar(int num_steps) {
  const int n = std::max(kTrainingSteps, num_steps);
  std::vector<double> train(n + 1);
  train[0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const double beta =
        n == 1 ? kLinearBetaStart
               : kLinearBetaStart + (kLinearBetaEnd - kLinearBetaStart) * (i - 1) / (n - 1);
    train[i] = train[i - 1] * (1.0 - beta);
  }
  std::vector<double> out(num_steps + 1);
  for (int k = 0; k <= num_steps; ++k) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * n / static_cast<double>(num_steps)));
    out[k] = train[idx];
  }
  return out;
}

std::vector<double> cosine_alpha_bar(int num_steps) {
  const auto f = [&](int t) {
    const double c = std::cos((static_cast<double>(t) / num_steps + kCosineOffset) /
                              (1.0 + kCosineOffset) * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> out(num_steps + 1);
  out[0] = 1.0;
  const double f0 = f(0);
  for (int t = 1; t <= num_steps; ++t) {
    const double beta = std::min(1.0 - (f(t) / f0) / (f(t - 1) / f0), kMaxBeta);
    out[t] = out[t - 1] * (1.0 - beta);
  }
  return out;
}

}  // namespace

NoiseSchedule NoiseSchedule::make(int num_steps, ScheduleKind kind) {
  if (num_steps < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
  return NoiseSchedule(kind == ScheduleKind::LinearBeta ? linear_beta_alpha_bar(num_steps)
                                                        : cosine_alpha_bar(num_steps),
                       kind);
}

NoiseSchedule NoiseSchedule::from_alpha_bar(std::vector<double> alpha_bar, ScheduleKind kind) {
  return NoiseSchedule(std::move(alpha_bar), kind);
}

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bar, ScheduleKind kind)
    : alpha_bar_(std::move(alpha_bar)), kind_(kind) {
  if (alpha_bar_.size() < 2) throw std::invalid_argument("NoiseSchedule: need T >= 1");
  if (alpha_bar_[0] != 1.0) throw std::invalid_argument("NoiseSchedule: alpha_bar_0 must be 1");
  for (std::size_t t = 1; t < alpha_bar_.size(); ++t) {
    const double a = alpha_bar_[t];
    if (!std::isfinite(a) || !(a > 0.0) || a > alpha_bar_[t - 1]) {
      throw std::invalid_argument("NoiseSchedule: alpha_bar must be finite, positive and "
                                  "non-increasing (index " + std::to_string(t) + ")");
    }
  }
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > num_steps()) {
    throw std::out_of_range("NoiseSchedule: time index " + std::to_string(t) + " out of range");
  }
  return alpha_bar_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::beta(int t) const {
  if (t < 1) throw std::out_of_range("NoiseSchedule::beta: t must be >= 1");
  return 1.0 - alpha_bar(t) / alpha_bar(t - 1);
}

double NoiseSchedule::alpha_bar_at(double index) const {
  const double top = num_steps();
  if (!(index >= 0.0) || !(index <= top)) {
    throw std::out_of_range("NoiseSchedule::alpha_bar_at: index outside [0, T]");
  }
  const double nearest = std::round(index);
  if (std::abs(index - nearest) <= 1e-9 * std::max(1.0, top)) {
    return alpha_bar_[static_cast<std::size_t>(nearest)];
  }
  const auto lo = static_cast<std::size_t>(std::floor(index));
  const double w = index - static_cast<double>(lo);
  return std::exp((1.0 - w) * std::log(alpha_bar_[lo]) + w * std::log(alpha_bar_[lo + 1]));
}

}  // namespace rbm::diffusion
