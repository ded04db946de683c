#include "rbm/simulate.hpp"

#include "rbm/errors.hpp"

#include <cmath>
#include <random>

namespace rbm::control {

Trajectory simulate_controlled(const Controller& controller, const Vector& x0,
                               const SimulationOptions& options) {
  const double t0 = options.initial_time;
  const double dt = options.step;
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_controlled: dt must be > 0");
  if (!(t0 < 1.0)) throw std::invalid_argument("simulate_controlled: t0 must be < 1");
  if (!controller) throw std::invalid_argument("simulate_controlled: null controller");
  if (!x0.allFinite()) throw std::invalid_argument("simulate_controlled: non-finite x0");

  const auto total = static_cast<int>(std::llround((1.0 - t0) / dt));
  if (total < 1) throw std::invalid_argument("simulate_controlled: dt exceeds the horizon");

  std::optional<std::mt19937_64> rng;
  std::normal_distribution<double> normal;
  if (options.noise_seed) rng.emplace(*options.noise_seed);
  const double noise_scale = std::sqrt(dt);

  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(total));
  traj.controls.reserve(static_cast<std::size_t>(total - 1));
  traj.states.push_back({x0, total});
  if (options.cost) {
    traj.costs.reserve(static_cast<std::size_t>(total));
    traj.costs.push_back(options.cost->value(x0));
  }

  Vector x = x0;
  for (int n = 0; n + 1 < total; ++n) {
    const double t = t0 + n * dt;
    Vector u = controller(x, t);
    Vector drift = u;
    if (options.drift_mode == DriftMode::StatePlusControl) drift += x;
    Vector next = x + dt * drift;
    if (rng) {
      for (Eigen::Index i = 0; i < next.size(); ++i) next[i] += noise_scale * normal(*rng);
    }
    if (!next.allFinite() || !u.allFinite()) {
      throw AbortedTrajectory("simulate_controlled: non-finite state", n, x);
    }
    x = std::move(next);
    traj.controls.push_back(std::move(u));
    traj.states.push_back({x, total - n - 1});
    if (options.cost) traj.costs.push_back(options.cost->value(x));
  }
  return traj;
}

}  // namespace rbm::control
