#include "rbm/errors.hpp"

#include <sstream>

namespace rbm {

namespace {

std::string with_context(const std::string& what, std::optional<int> step,
                         std::optional<int> iteration) {
  std::ostringstream os;
  os << what;
  if (step) os << " (step " << *step << ")";
  if (iteration) os << " (inner iteration " << *iteration << ")";
  return os.str();
}

}  // namespace

NumericalFailure::NumericalFailure(const std::string& what, std::optional<int> step,
                                   std::optional<int> iteration)
    : std::runtime_error(with_context(what, step, iteration)),
      step_(step),
      iteration_(iteration) {}

AbortedTrajectory::AbortedTrajectory(const std::string& what, int last_finite_step,
                                     Vector last_finite_state)
    : NumericalFailure(what + " (last finite step " + std::to_string(last_finite_step) + ")",
                       last_finite_step + 1),
      last_finite_step_(last_finite_step),
      last_finite_state_(std::move(last_finite_state)) {}

ConvergenceFailure::ConvergenceFailure(const std::string& what, int iterations,
                                       double final_residual)
    : std::runtime_error(what + " after " + std::to_string(iterations) +
                         " iterations, residual " + std::to_string(final_residual)),
      iterations_(iterations),
      final_residual_(final_residual) {}

void require_dimension(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << v.size();
    throw std::invalid_argument(os.str());
  }
}

void Trajectory::validate() const {
  if (states.size() != controls.size() + 1) {
    throw std::logic_error("Trajectory: states must number controls + 1");
  }
  if (!costs.empty() && costs.size() != states.size()) {
    throw std::logic_error("Trajectory: costs must be empty or one per state");
  }
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (states[i].time_index >= states[i - 1].time_index) {
      throw std::logic_error("Trajectory: time indices must strictly decrease");
    }
  }
}

}  // namespace rbm
