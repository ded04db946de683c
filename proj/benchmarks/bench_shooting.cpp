#include <rbm/control.hpp>
#include <rbm/shooting.hpp>

#include <benchmark/benchmark.h>

using namespace rbm;
using namespace rbm::control;

namespace {

LQInstance instance(int d, DriftMode mode) {
  Matrix a = Matrix::Identity(d, d);
  a.diagonal().setLinSpaced(d, 1.0, 2.0);
  return {a, Vector::Ones(d), Vector::LinSpaced(d, -1.0, 1.0), 0.0, Gamma::finite(10.0), mode};
}

void BM_ShootingPureControl(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)), DriftMode::PureControl);
  for (auto _ : state) benchmark::DoNotOptimize(shooting_bvp_solve(inst, 100));
}

void BM_ShootingStatePlusControl(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)), DriftMode::StatePlusControl);
  for (auto _ : state) benchmark::DoNotOptimize(shooting_bvp_solve(inst, 100));
}

void BM_StyleController(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto inst = instance(d, DriftMode::PureControl);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        style_controller(inst.initial_state, 0.3, inst.extractor, inst.target, Gamma::finite(10.0)));
  }
}

}  // namespace

BENCHMARK(BM_ShootingPureControl)->Arg(1)->Arg(2)->Arg(8);
BENCHMARK(BM_ShootingStatePlusControl)->Arg(1)->Arg(2)->Arg(8);
BENCHMARK(BM_StyleController)->Arg(2)->Arg(32);
