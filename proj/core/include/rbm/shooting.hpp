#pragma once

#include "rbm/control.hpp"
#include "rbm/types.hpp"

#include <vector>

namespace rbm::control {

/// State/costate pair sampled on a uniform grid over [t0, 1].
struct CostateSolution {
  DriftMode drift_mode = DriftMode::PureControl;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> costates;
  Vector terminal_state;
  int iterations = 0;
  double boundary_residual = 0.0;

  /// u* = -p at grid point i.
  Vector control(std::size_t i) const { return -costates[i]; }

  /// Values between grid points, re-integrated from the nearest grid node
  /// on the left.
  Vector state_at(double t) const;
  Vector costate_at(double t) const;
};

struct ShootingOptions {
  int max_iterations = 100;
  double residual_tolerance = 1e-10;
  /// RK4 sub-steps are sized so no step exceeds this.
  double max_step = 1e-3;
};

/// Solves the Hamiltonian boundary-value problem
///   pure-control:       x' = -p,     p' = 0
///   state-plus-control: x' = x - p,  p' = -p
/// with x(t0) = x0 and p(1) = gamma A^T (A x(1) - y1), by damped Newton on
/// the unknown p(t0). Throws ConvergenceFailure past the iteration cap.
CostateSolution shooting_bvp_solve(const LQInstance& instance, int grid_points,
                                   const ShootingOptions& options = {});

}  // namespace rbm::control
