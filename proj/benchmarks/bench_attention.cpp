#include <rbm/attention.hpp>

#include <benchmark/benchmark.h>

using namespace rbm;
using namespace rbm::afa;

namespace {

AttentionBranch branch(Eigen::Index tokens, Eigen::Index width) {
  return {Matrix::Random(tokens, width), Matrix::Random(tokens, width)};
}

void BM_Attention(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix q = Matrix::Random(n, 64);
  const auto kv = branch(n, 64);
  for (auto _ : state) benchmark::DoNotOptimize(attention(q, kv, default_scale(64), 4));
  state.SetComplexityN(n);
}

void BM_Stylize(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix q = Matrix::Random(n, 64);
  const auto base = branch(n, 64), text = branch(16, 64), style = branch(16, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(afa_stylize(q, base, text, style, default_scale(64), 4));
  }
}

void BM_Compose(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix q = Matrix::Random(n, 64);
  const auto base = branch(n, 64), text = branch(16, 64), style = branch(16, 64),
             content = branch(16, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(afa_compose(q, base, text, style, content, default_scale(64), 4));
  }
}

}  // namespace

BENCHMARK(BM_Attention)->RangeMultiplier(4)->Range(16, 1024)->Complexity();
BENCHMARK(BM_Stylize)->Arg(64)->Arg(256);
BENCHMARK(BM_Compose)->Arg(64)->Arg(256);
