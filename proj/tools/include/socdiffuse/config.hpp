#pragma once

#include <rbm/control.hpp>
#include <rbm/sampler.hpp>
#include <rbm/schedule.hpp>
#include <rbm/types.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace socdiffuse {

using rbm::Matrix;
using rbm::Vector;

/// Shape-aware exact equality (Eigen's operator== requires equal shapes).
bool same(const Matrix& a, const Matrix& b);

/// Malformed or incomplete configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  SampleAlg1,
  SampleAlg2,
  VerifyLq,
  VerifyBridge,
  VerifyProp2,
  VerifyHjb,
  VerifyAfa,
  SweepGamma
};

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

struct ScoreSpec {
  std::string kind = "gaussian";  ///< gaussian | mixture
  std::string path = "variance-preserving";  ///< variance-preserving | flow
  Vector mean;
  double variance = 1.0;
  std::vector<double> weights;
  Matrix means;  ///< one component mean per row
  std::vector<double> variances;

  friend bool operator==(const ScoreSpec&, const ScoreSpec&);
};

struct ExtractorSpec {
  std::string kind = "linear";  ///< linear | quadratic
  Matrix matrix;
  Vector reference;

  friend bool operator==(const ExtractorSpec&, const ExtractorSpec&);
};

struct ControlSpec {
  Vector x0;
  Vector x1;
  double t0 = 0.0;
  double dt = 1e-3;
  rbm::Gamma gamma = rbm::Gamma::infinite();
  rbm::control::DriftMode drift_mode = rbm::control::DriftMode::PureControl;
  std::vector<double> gammas;
  int grid_points = 100;

  friend bool operator==(const ControlSpec&, const ControlSpec&);
};

struct AfaSpec {
  int instances = 100;
  int query_tokens = 4;
  int tokens = 3;  ///< per branch
  int key_width = 8;
  int value_width = 6;
  int heads = 1;
  std::optional<double> scale;  ///< default 1/sqrt(key_width)

  friend bool operator==(const AfaSpec&, const AfaSpec&) = default;
};

/// Flat "section.key = value" experiment description.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SampleAlg1;
  int dimension = 0;  ///< d; 0 = inferred
  int features = 0;   ///< k; 0 = inferred
  rbm::diffusion::ScheduleKind schedule = rbm::diffusion::ScheduleKind::LinearBeta;
  ScoreSpec score;
  ExtractorSpec extractor;
  rbm::sampling::SamplerConfig sampler;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";
  ControlSpec control;
  AfaSpec afa;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses config text. Errors name the line and/or field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(echo_config(c)) == c.
std::string echo_config(const ExperimentConfig& config);

/// Shifts the seed list so that it starts at `base` (spacing preserved).
void rebase_seeds(ExperimentConfig& config, std::uint64_t base);

}  // namespace socdiffuse
