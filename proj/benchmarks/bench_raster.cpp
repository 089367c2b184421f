#include <benchmark/benchmark.h>

#include "textailor/atlas.hpp"
#include "textailor/primitives.hpp"
#include "textailor/raster.hpp"
#include "textailor/regions.hpp"

using namespace textailor;

namespace {

Mesh fitted_icosphere(int subdivisions) {
  Mesh m = make_icosphere(subdivisions);
  normalize_to_sphere(m, kDefaultFitRadius);
  return m;
}

void BM_Rasterize(benchmark::State& state) {
  const Mesh mesh = fitted_icosphere(static_cast<int>(state.range(0)));
  const int res = static_cast<int>(state.range(1));
  const Camera cam = viewpoint_to_camera(make_viewpoint(30, 15, 1), {res, res});
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(mesh, cam));
  state.counters["faces"] = static_cast<double>(mesh.face_count());
}
BENCHMARK(BM_Rasterize)->Args({3, 64})->Args({3, 256})->Args({5, 256})->Unit(benchmark::kMicrosecond);

void BM_ClassifyAndProject(benchmark::State& state) {
  const Mesh mesh = fitted_icosphere(3);
  const Camera cam = viewpoint_to_camera(make_viewpoint(0, 15, 1));
  const RasterBuffers buf = rasterize(mesh, cam);
  const TexelMap map = build_texel_map(mesh, 256);
  const Image image(64, 64, {90, 140, 60});
  for (auto _ : state) {
    TextureAtlas atlas(256);
    const RegionMasks masks = classify_regions(mesh, buf, atlas, cam);
    benchmark::DoNotOptimize(project(image, mesh, buf, masks, cam, map, atlas));
  }
}
BENCHMARK(BM_ClassifyAndProject)->Unit(benchmark::kMicrosecond);

void BM_BuildTexelMap(benchmark::State& state) {
  const Mesh mesh = fitted_icosphere(3);
  for (auto _ : state) benchmark::DoNotOptimize(build_texel_map(mesh, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BuildTexelMap)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
