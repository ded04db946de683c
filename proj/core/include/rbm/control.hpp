#pragma once

#include "rbm/types.hpp"

#include <string_view>

/// Closed-form linear-quadratic controllers.
///
/// Clock convention: this module runs on the control clock, where t0 -> 1
/// flows from noise towards data. The sampler counts step indices T..0 in
/// the opposite direction; `control_time_from_step` is the one place the
/// two are converted.
namespace rbm::control {

enum class DriftMode {
  PureControl,      ///< dX = u dt
  StatePlusControl  ///< dX = (X + u) dt
};

DriftMode parse_drift_mode(std::string_view name);
std::string_view to_string(DriftMode mode);

/// Sampler step index (T..0) to control time, t = 1 - step / T.
double control_time_from_step(int step, int num_steps);
/// Inverse of control_time_from_step (fractional steps allowed).
double step_from_control_time(double t, int num_steps);

/// Linear style extractor A, target features y1, initial condition
/// (x0, t0), terminal weight gamma and the drift family.
struct LQInstance {
  Matrix extractor;
  Vector target;
  Vector initial_state;
  double initial_time = 0.0;
  Gamma gamma = Gamma::infinite();
  DriftMode drift_mode = DriftMode::PureControl;

  int dimension() const { return static_cast<int>(initial_state.size()); }
  /// Throws std::invalid_argument on inconsistent shapes, NaNs or t0 >= 1.
  void validate() const;
};

/// u* for the point-target problem. Infinite gamma: (x1 - x) / (1 - t);
/// finite gamma: gamma (x1 - x) / (1 + gamma (1 - t)). Throws SingularTime
/// for t >= 1.
Vector bridge_controller(const Vector& x, double t, const Vector& x1, Gamma gamma);

/// Pseudoinverse rank tolerance used on the infinite-gamma path.
inline constexpr double kPseudoInverseTolerance = 1e-10;

/// u* for the linear-feature target problem. Infinite gamma:
/// A^+ (y1 - A x) / (1 - t); finite gamma:
/// -(I/gamma + A^T A (1 - t))^{-1} (A^T A x - A^T y1).
Vector style_controller(const Vector& x, double t, const Matrix& a, const Vector& y1,
                        Gamma gamma);

/// Constant costate of the pure-control problem,
/// p = (I/gamma + A^T A (1 - t0))^{-1} (A^T A x0 - A^T y1); the infinite
/// gamma limit uses A^+.
Vector pure_control_costate(const LQInstance& instance);

/// Terminal state x1 of the state-plus-control problem (t0 = 0), from
/// x1 = [I + (gamma/2)(e^2 - 1) A^T A]^{-1} [e x0 + (gamma/2)(e^2 - 1) A^T y1].
/// Throws LinearSolveFailure if the system is singular.
Vector solve_terminal_state_prop2(const LQInstance& instance);

struct ControlPoint {
  Vector state;
  Vector costate;
  Vector control;
};

/// Closed-form state/costate of the state-plus-control problem:
///   x_t = x0 e^t - c e^{1+t} + c e^{1-t},  p_t = 2 c e^{1-t},  u = -p_t,
/// with c = (gamma/2) A^T (A x1 - y1).
class ModulatedSystem {
 public:
  explicit ModulatedSystem(const LQInstance& instance);

  ControlPoint at(double t) const;
  const Vector& terminal_state() const { return terminal_state_; }

 private:
  Vector x0_;
  Vector half_gradient_;  // c
  Vector terminal_state_;
};

ControlPoint modulated_solution(const LQInstance& instance, double t);

}  // namespace rbm::control
