#include "rbm/shooting.hpp"

#include "rbm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rbm::control {

namespace {

struct Phase {
  Vector x;
  Vector p;
};

Phase vector_field(const Phase& s, DriftMode mode) {
  if (mode == DriftMode::PureControl) return {-s.p, Vector::Zero(s.p.size())};
  return {s.x - s.p, -s.p};
}

Phase rk4(const Phase& s, double h, DriftMode mode) {
  const auto add = [](const Phase& a, const Phase& k, double w) {
    return Phase{a.x + w * k.x, a.p + w * k.p};
  };
  const Phase k1 = vector_field(s, mode);
  const Phase k2 = vector_field(add(s, k1, 0.5 * h), mode);
  const Phase k3 = vector_field(add(s, k2, 0.5 * h), mode);
  const Phase k4 = vector_field(add(s, k3, h), mode);
  return {s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.p + (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p)};
}

Phase integrate(Phase s, double from, double to, DriftMode mode, double max_step) {
  const double span = to - from;
  if (span <= 0.0) return s;
  const int n = std::max(1, static_cast<int>(std::ceil(span / max_step)));
  const double h = span / n;
  for (int i = 0; i < n; ++i) s = rk4(s, h, mode);
  return s;
}

struct Shot {
  std::vector<Phase> nodes;
  Vector residual;
  double scale;
};

Shot shoot(const LQInstance& inst, const Vector& p0, const std::vector<double>& times,
           double max_step) {
  Shot shot;
  shot.nodes.reserve(times.size());
  shot.nodes.push_back({inst.initial_state, p0});
  for (std::size_t i = 1; i < times.size(); ++i) {
    shot.nodes.push_back(
        integrate(shot.nodes.back(), times[i - 1], times[i], inst.drift_mode, max_step));
  }
  const auto& a = inst.extractor;
  const Phase& end = shot.nodes.back();
  const Vector target_costate = inst.gamma.value() * a.transpose() * (a * end.x - inst.target);
  shot.residual = end.p - target_costate;
  shot.scale = 1.0 + target_costate.lpNorm<Eigen::Infinity>();
  return shot;
}

}  // namespace

CostateSolution shooting_bvp_solve(const LQInstance& instance, int grid_points,
                                   const ShootingOptions& options) {
  instance.validate();
  if (instance.gamma.is_infinite()) {
    throw std::invalid_argument("shooting_bvp_solve: gamma must be finite");
  }
  if (grid_points < 2) throw std::invalid_argument("shooting_bvp_solve: need >= 2 grid points");

  const double t0 = instance.initial_time;
  std::vector<double> times(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    times[static_cast<std::size_t>(i)] = t0 + (1.0 - t0) * i / (grid_points - 1);
  }
  times.back() = 1.0;

  const auto d = instance.initial_state.size();
  Vector p0 = Vector::Zero(d);
  Shot shot = shoot(instance, p0, times, options.max_step);
  double norm = shot.residual.lpNorm<Eigen::Infinity>();

  int iter = 0;
  while (norm > options.residual_tolerance * shot.scale) {
    if (iter >= options.max_iterations) {
      throw ConvergenceFailure("shooting_bvp_solve: Newton did not converge", iter, norm);
    }
    ++iter;

    // Finite-difference Jacobian of the terminal residual in p(t0).
    Matrix jac(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(p0[j]));
      Vector up = p0, down = p0;
      up[j] += h;
      down[j] -= h;
      jac.col(j) = (shoot(instance, up, {t0, 1.0}, options.max_step).residual -
                    shoot(instance, down, {t0, 1.0}, options.max_step).residual) /
                   (2.0 * h);
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) {
      throw ConvergenceFailure("shooting_bvp_solve: singular Newton Jacobian", iter, norm);
    }
    const Vector step = lu.solve(-shot.residual);

    double damping = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 30; ++halvings, damping *= 0.5) {
      Vector candidate = p0 + damping * step;
      Shot trial = shoot(instance, candidate, times, options.max_step);
      const double trial_norm = trial.residual.lpNorm<Eigen::Infinity>();
      if (trial_norm < norm || trial_norm <= options.residual_tolerance * trial.scale) {
        p0 = std::move(candidate);
        shot = std::move(trial);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw ConvergenceFailure("shooting_bvp_solve: line search stalled", iter, norm);
    }
  }

  CostateSolution sol;
  sol.drift_mode = instance.drift_mode;
  sol.times = times;
  sol.states.reserve(times.size());
  sol.costates.reserve(times.size());
  for (const auto& node : shot.nodes) {
    sol.states.push_back(node.x);
    sol.costates.push_back(node.p);
  }
  sol.terminal_state = shot.nodes.back().x;
  sol.iterations = iter;
  sol.boundary_residual = norm;
  return sol;
}

namespace {

Phase phase_at(const CostateSolution& sol, double t) {
  if (sol.times.empty()) throw std::logic_error("CostateSolution: empty");
  if (t < sol.times.front() || t > sol.times.back()) {
    throw std::out_of_range("CostateSolution: t outside the solved interval");
  }
  const auto it = std::upper_bound(sol.times.begin(), sol.times.end(), t);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - sol.times.begin() - 1));
  return integrate({sol.states[i], sol.costates[i]}, sol.times[i], t, sol.drift_mode, 1e-3);
}

}  // namespace

Vector CostateSolution::state_at(double t) const { return phase_at(*this, t).x; }
Vector CostateSolution::costate_at(double t) const { return phase_at(*this, t).p; }

}  // namespace rbm::control
