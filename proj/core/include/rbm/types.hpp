#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Opaque conditioning tag (stands in for the text prompt).
using Context = std::string;

/// Terminal-cost weight. The infinite weight is a flag with its own code
/// path, never a large float.
class Gamma {
 public:
  static Gamma finite(double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("Gamma::finite: weight must be finite and >= 0");
    }
    return Gamma(value, false);
  }
  static Gamma infinite() { return Gamma(0.0, true); }

  bool is_infinite() const { return infinite_; }
  double value() const {
    if (infinite_) throw std::logic_error("Gamma::value: weight is infinite");
    return value_;
  }

  friend bool operator==(const Gamma&, const Gamma&) = default;

 private:
  Gamma(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// A state X_t together with its integer time index.
struct State {
  Vector values;
  int time_index = 0;
};

/// Sequence of states with the controls applied between them. `costs` is
/// either empty or holds one terminal-cost record per state. Time indices
/// strictly decrease along `states`.
struct Trajectory {
  std::vector<State> states;
  std::vector<Vector> controls;
  std::vector<double> costs;

  std::size_t num_steps() const { return controls.size(); }
  bool empty() const { return states.empty(); }
  const State& final_state() const { return states.back(); }

  /// Throws std::logic_error if a fencepost or ordering invariant fails.
  void validate() const;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace rbm
