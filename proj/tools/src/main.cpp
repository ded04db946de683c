// socdiffuse: run experiments, verification suites, and plots.
//
// Exit codes: 0 success, 1 failed invariant / numerical failure / I/O
// error, 2 malformed configuration or command line.

#include "socdiffuse/artifacts.hpp"
#include "socdiffuse/config.hpp"
#include "socdiffuse/experiments.hpp"

#include <rbm/errors.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

using socdiffuse::ConfigError;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "base seed (overrides the SEED environment variable)");
  cmd->add_option("--out-dir", flags.out_dir, "output directory");
  cmd->add_option("--threads", flags.threads, "worker threads for per-seed loops")
      ->check(CLI::Range(1, 256));
}

/// --seed wins; otherwise SEED from the environment, if set.
std::optional<std::uint64_t> effective_seed(const CommonFlags& flags) {
  if (flags.seed) return flags.seed;
  const char* env = std::getenv("SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  std::uint64_t value = 0;
  const std::string text(env);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("SEED environment variable is not an unsigned integer: '" + text + "'");
  }
  return value;
}

int report_status(const socdiffuse::RunReport& report) {
  std::cout << socdiffuse::format_checks(report);
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled diffusion sampling experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, verify_flags;
  std::string config_path, suite, csv_path, out_path;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "experiment config")->required();
  add_common(run, run_flags);

  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  verify->add_option("suite", suite, "diffusion-core | style-features | optimal-control | soc-sampler | afa | all")
      ->required();
  add_common(verify, verify_flags);

  auto* plot = app.add_subcommand("plot", "render a CSV as SVG");
  plot->add_option("csv", csv_path, "input CSV")->required();
  plot->add_option("out", out_path, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto config = socdiffuse::load_config(config_path);
      socdiffuse::RunOptions options;
      options.seed = effective_seed(run_flags);
      if (!run_flags.out_dir.empty()) options.out_dir = run_flags.out_dir;
      options.threads = run_flags.threads;
      return report_status(socdiffuse::run_experiment(std::move(config), options));
    }
    if (*verify) {
      const auto seed = effective_seed(verify_flags).value_or(0);
      const std::string dir = verify_flags.out_dir.empty() ? "verify-" + suite : verify_flags.out_dir;
      return report_status(socdiffuse::verify_suite(suite, seed, dir, verify_flags.threads));
    }
    socdiffuse::plot_csv(csv_path, out_path);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const rbm::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what();
    if (e.step()) std::cerr << " (step " << *e.step() << ')';
    std::cerr << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
