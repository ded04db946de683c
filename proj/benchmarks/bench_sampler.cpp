#include <rbm/features.hpp>
#include <rbm/sampler.hpp>
#include <rbm/schedule.hpp>
#include <rbm/score.hpp>

#include <benchmark/benchmark.h>

using namespace rbm;

namespace {

// N(0, I) prior in d dimensions, feature = first coordinate, reference 2.
struct Setup {
  explicit Setup(int d)
      : schedule(diffusion::NoiseSchedule::make(50)),
        score(Vector::Zero(d), 1.0, diffusion::variance_preserving(schedule)),
        cost(std::make_shared<style::LinearExtractor>(Matrix::Identity(1, d)),
             Vector::Constant(1, 2.0)) {
    config.proximal_strength = 1.0;
  }
  diffusion::NoiseSchedule schedule;
  diffusion::IsotropicGaussianScore score;
  style::TerminalCost cost;
  sampling::SamplerConfig config;
};

void BM_Uncontrolled(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampling::sample_uncontrolled(s.config, s.score, s.schedule));
  }
}

void BM_Algorithm1(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampling::run_algorithm1(s.config, s.score, s.cost, s.schedule));
  }
}

void BM_Algorithm1FiniteDifference(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  s.config.gradient_mode = sampling::GradientMode::FiniteDifference;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampling::run_algorithm1(s.config, s.score, s.cost, s.schedule));
  }
}

void BM_Algorithm2(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampling::run_algorithm2(s.config, s.score, s.cost, s.schedule));
  }
}

}  // namespace

BENCHMARK(BM_Uncontrolled)->Arg(2)->Arg(64);
BENCHMARK(BM_Algorithm1)->Arg(2)->Arg(64);
BENCHMARK(BM_Algorithm1FiniteDifference)->Arg(2)->Arg(64);
BENCHMARK(BM_Algorithm2)->Arg(2)->Arg(64);
