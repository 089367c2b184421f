#include <benchmark/benchmark.h>

#include "textailor/sampler.hpp"
#include "textailor/toy_network.hpp"

using namespace textailor;

namespace {

void BM_ResampleLoopAnalytic(benchmark::State& state) {
  const int repetitions = static_cast<int>(state.range(0));
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear, 30);
  AnalyticGaussianDenoiser d(LatentGrid(3, 16, 16, 0.3), 0.002, sched);
  const LatentGrid known(3, 16, 16, -0.2);
  std::vector<std::uint8_t> mask(256, 0);
  for (std::size_t i = 0; i < mask.size(); i += 2) mask[i] = 1;
  const Conditioning cond = make_conditioning(0, 16, 16);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resample_loop(d, known, mask, cond, sched, {repetitions, 30}, seed++));
  }
}
BENCHMARK(BM_ResampleLoopAnalytic)->Arg(0)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_ResampleLoopToy(benchmark::State& state) {
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear, 30);
  ToyArchitecture arch;
  ToyDenoiser d(arch, init_toy_params(arch, 1), 1000);
  const LatentGrid known(3, 16, 16, -0.2);
  const std::vector<std::uint8_t> mask(256, 1);
  const Conditioning cond = make_conditioning(0, 16, 16);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resample_loop(d, known, mask, cond, sched, {3, 30}, seed++));
  }
}
BENCHMARK(BM_ResampleLoopToy)->Unit(benchmark::kMillisecond);

}  // namespace
