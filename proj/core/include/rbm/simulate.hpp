#pragma once

#include "rbm/control.hpp"
#include "rbm/features.hpp"
#include "rbm/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace rbm::control {

/// Feedback law u(x, t) on the control clock.
using Controller = std::function<Vector(const Vector&, double)>;

struct SimulationOptions {
  double initial_time = 0.0;
  double step = 1e-3;
  /// When set, adds Brownian increments sqrt(dt) * N(0, I) from this seed.
  std::optional<std::uint64_t> noise_seed{};
  DriftMode drift_mode = DriftMode::PureControl;
  /// When set, the cost of every state is recorded.
  const style::TerminalCost* cost = nullptr;
};

/// Euler (or Euler-Maruyama) integration of dX = [v(X) + u] dt (+ dW) on
/// the uniform grid t_n = t0 + n dt. Integration stops at 1 - dt, one step
/// short of the 1/(1-t) singularity. State time indices count the steps
/// remaining to t = 1. Throws AbortedTrajectory on a non-finite state.
Trajectory simulate_controlled(const Controller& controller, const Vector& x0,
                               const SimulationOptions& options = {});

/// Control time of a simulated state (t = 1 - index * dt).
inline double simulated_time(const State& s, double step) { return 1.0 - s.time_index * step; }

}  // namespace rbm::control
