#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace rbm::diffusion {

enum class ScheduleKind { LinearBeta, Cosine };

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

/// Linear-beta training schedule endpoints and length. Sampling schedules
/// with T steps sit on trailing, evenly spaced indices of this grid.
inline constexpr double kLinearBetaStart = 1e-4;
inline constexpr double kLinearBetaEnd = 0.02;
inline constexpr int kTrainingSteps = 1000;

/// Cosine schedule offset and per-step beta clip.
inline constexpr double kCosineOffset = 0.008;
inline constexpr double kMaxBeta = 0.999;

/// Cumulative signal levels alpha_bar_0..alpha_bar_T, with alpha_bar_0 = 1,
/// non-increasing, and alpha_bar_T > 0.
class NoiseSchedule {
 public:
  /// Throws std::invalid_argument for num_steps < 1.
  static NoiseSchedule make(int num_steps, ScheduleKind kind = ScheduleKind::LinearBeta);

  /// Wraps an explicit sequence (validated against the invariants).
  static NoiseSchedule from_alpha_bar(std::vector<double> alpha_bar,
                                      ScheduleKind kind = ScheduleKind::LinearBeta);

  int num_steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
  ScheduleKind kind() const { return kind_; }
  std::span<const double> alpha_bars() const { return alpha_bar_; }

  double alpha_bar(int t) const;

  /// Effective per-step beta: 1 - alpha_bar_t / alpha_bar_{t-1}, t >= 1.
  double beta(int t) const;

  /// alpha_bar at a fractional index in [0, T]; log-linear between grid
  /// points and exact on them.
  double alpha_bar_at(double index) const;

 private:
  NoiseSchedule(std::vector<double> alpha_bar, ScheduleKind kind);

  std::vector<double> alpha_bar_;
  ScheduleKind kind_;
};

}  // namespace rbm::diffusion
