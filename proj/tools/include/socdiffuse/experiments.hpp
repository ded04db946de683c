#pragma once

#include "socdiffuse/config.hpp"
#include "socdiffuse/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace socdiffuse {

/// Unknown verification suite name (CLI exit code 2).
class UnknownSuite : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< rebases the config's seed list
  std::optional<std::filesystem::path> out_dir;  ///< overrides experiment.output_dir
  int threads = 1;
};

/// Executes the configured experiment and writes its artifacts
/// (summary.json, checks.csv, CSV tables/trajectories, SVG plots). The
/// wall-clock time goes to timing.json, outside the deterministic set.
RunReport run_experiment(ExperimentConfig config, const RunOptions& options = {});

/// Names accepted by verify_suite.
const std::vector<std::string>& suite_names();

/// Runs every invariant check of the named suite and writes summary.json
/// and checks.csv (plus tables) into `out_dir`. Throws UnknownSuite.
RunReport verify_suite(const std::string& name, std::uint64_t seed,
                       const std::filesystem::path& out_dir, int threads = 1);

}  // namespace socdiffuse
