#include <benchmark/benchmark.h>

#include <random>

#include "textailor/toy_network.hpp"

using namespace textailor;

namespace {

struct ToyInputs {
  ToyArchitecture arch;
  std::vector<double> params;
  LatentGrid z;
  Conditioning cond;

  explicit ToyInputs(int size) : params(init_toy_params(arch, 1)), cond(make_conditioning(2, size, size)) {
    std::mt19937_64 rng(2);
    z = gaussian_like(LatentGrid(3, size, size), rng);
    for (auto& d : cond.depth) d = 0.5;
  }
};

void BM_ToyForward(benchmark::State& state) {
  const ToyInputs in(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(toy_forward(in.arch, in.params, in.z, 500, 1000, in.cond));
}
BENCHMARK(BM_ToyForward)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ToyBackward(benchmark::State& state) {
  const ToyInputs in(static_cast<int>(state.range(0)));
  const LatentGrid upstream(3, in.z.height, in.z.width, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(toy_backward(in.arch, in.params, in.z, 500, 1000, in.cond, upstream));
  }
}
BENCHMARK(BM_ToyBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

}  // namespace
