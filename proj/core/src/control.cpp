#include "rbm/control.hpp"

#include "rbm/errors.hpp"
#include "rbm/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rbm::control {

DriftMode parse_drift_mode(std::string_view name) {
  if (name == "pure-control") return DriftMode::PureControl;
  if (name == "state-plus-control") return DriftMode::StatePlusControl;
  throw std::invalid_argument("unknown drift mode '" + std::string(name) + "'");
}

std::string_view to_string(DriftMode mode) {
  return mode == DriftMode::PureControl ? "pure-control" : "state-plus-control";
}

double control_time_from_step(int step, int num_steps) {
  if (num_steps < 1 || step < 0 || step > num_steps) {
    throw std::out_of_range("control_time_from_step: step outside [0, T]");
  }
  return 1.0 - static_cast<double>(step) / num_steps;
}

double step_from_control_time(double t, int num_steps) { return (1.0 - t) * num_steps; }

void LQInstance::validate() const {
  if (initial_state.size() == 0) throw std::invalid_argument("LQInstance: empty initial state");
  if (extractor.cols() != initial_state.size()) {
    throw std::invalid_argument("LQInstance: A must have d columns");
  }
  if (extractor.rows() != target.size()) {
    throw std::invalid_argument("LQInstance: A must have k = dim(y1) rows");
  }
  if (!extractor.allFinite() || !target.allFinite() || !initial_state.allFinite()) {
    throw std::invalid_argument("LQInstance: non-finite entries");
  }
  if (!(initial_time < 1.0) || !(initial_time >= 0.0)) {
    throw std::invalid_argument("LQInstance: t0 must lie in [0, 1)");
  }
}

Vector bridge_controller(const Vector& x, double t, const Vector& x1, Gamma gamma) {
  require_dimension(x1, x.size(), "bridge_controller: x1");
  if (!(t < 1.0)) throw SingularTime("bridge_controller: t must be < 1");
  if (gamma.is_infinite()) return (x1 - x) / (1.0 - t);
  const double g = gamma.value();
  return g * (x1 - x) / (1.0 + g * (1.0 - t));
}

namespace {

Vector finite_gamma_costate(const Matrix& a, const Vector& y1, const Vector& x, double horizon,
                            double gamma) {
  const auto d = x.size();
  if (gamma == 0.0) return Vector::Zero(d);
  const Matrix ata = a.transpose() * a;
  Matrix system = ata * horizon;
  system.diagonal().array() += 1.0 / gamma;
  const Vector rhs = ata * x - a.transpose() * y1;
  Eigen::LDLT<Matrix> ldlt(system);
  if (ldlt.info() != Eigen::Success) throw LinearSolveFailure("style costate: LDLT failed");
  return ldlt.solve(rhs);
}

}  // namespace

Vector style_controller(const Vector& x, double t, const Matrix& a, const Vector& y1,
                        Gamma gamma) {
  if (a.cols() != x.size()) throw std::invalid_argument("style_controller: A must have d columns");
  require_dimension(y1, a.rows(), "style_controller: y1");
  if (!(t < 1.0)) throw SingularTime("style_controller: t must be < 1");
  if (gamma.is_infinite()) {
    return pseudo_inverse(a, kPseudoInverseTolerance) * (y1 - a * x) / (1.0 - t);
  }
  return -finite_gamma_costate(a, y1, x, 1.0 - t, gamma.value());
}

Vector pure_control_costate(const LQInstance& instance) {
  instance.validate();
  const auto& a = instance.extractor;
  const double horizon = 1.0 - instance.initial_time;
  if (instance.gamma.is_infinite()) {
    return pseudo_inverse(a, kPseudoInverseTolerance) *
           (a * instance.initial_state - instance.target) / horizon;
  }
  return finite_gamma_costate(a, instance.target, instance.initial_state, horizon,
                              instance.gamma.value());
}

Vector solve_terminal_state_prop2(const LQInstance& instance) {
  instance.validate();
  if (instance.drift_mode != DriftMode::StatePlusControl) {
    throw std::invalid_argument("solve_terminal_state_prop2: needs state-plus-control drift");
  }
  if (instance.gamma.is_infinite()) {
    throw std::invalid_argument("solve_terminal_state_prop2: gamma must be finite");
  }
  if (instance.initial_time != 0.0) {
    throw std::invalid_argument("solve_terminal_state_prop2: closed form requires t0 = 0");
  }
  const auto& a = instance.extractor;
  const double e = std::numbers::e;
  const double k = 0.5 * instance.gamma.value() * (e * e - 1.0);
  Matrix system = k * (a.transpose() * a);
  system.diagonal().array() += 1.0;
  const Vector rhs = e * instance.initial_state + k * (a.transpose() * instance.target);
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw LinearSolveFailure("solve_terminal_state_prop2: singular system");
  Vector x1 = lu.solve(rhs);
  if (!x1.allFinite()) throw LinearSolveFailure("solve_terminal_state_prop2: non-finite solution");
  return x1;
}

ModulatedSystem::ModulatedSystem(const LQInstance& instance)
    : x0_(instance.initial_state), terminal_state_(solve_terminal_state_prop2(instance)) {
  const auto& a = instance.extractor;
  half_gradient_ =
      0.5 * instance.gamma.value() * a.transpose() * (a * terminal_state_ - instance.target);
}

ControlPoint ModulatedSystem::at(double t) const {
  if (!(t >= 0.0) || !(t <= 1.0)) throw std::invalid_argument("modulated_solution: t outside [0, 1]");
  const double e_plus = std::exp(1.0 + t);
  const double e_minus = std::exp(1.0 - t);
  ControlPoint pt;
  pt.state = x0_ * std::exp(t) - half_gradient_ * e_plus + half_gradient_ * e_minus;
  pt.costate = 2.0 * half_gradient_ * e_minus;
  pt.control = -pt.costate;
  return pt;
}

ControlPoint modulated_solution(const LQInstance& instance, double t) {
  return ModulatedSystem(instance).at(t);
}

}  // namespace rbm::control
