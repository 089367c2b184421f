#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "textailor/error.hpp"
#include "textailor/primitives.hpp"
#include "textailor/regions.hpp"

using namespace textailor;

namespace {

Mesh fitted(Mesh m) {
  normalize_to_sphere(m, kDefaultFitRadius);
  return m;
}

}  // namespace

TEST(Regions, EmptyAtlasMakesEveryLitPixelNew) {
  const Mesh m = fitted(make_icosphere(2));
  const Camera cam = viewpoint_to_camera(make_viewpoint(10, 10, 1));
  const RasterBuffers buf = rasterize(m, cam);
  const RegionMasks masks = classify_regions(m, buf, TextureAtlas(128), cam);
  const RegionCounts c = masks.counts();
  EXPECT_EQ(c.keep + c.update, 0u);
  EXPECT_EQ(c.fresh + c.ignore, buf.foreground_count());
  EXPECT_GT(c.fresh, 20 * c.ignore);
  for (std::size_t i = 0; i < masks.label.size(); ++i) {
    EXPECT_EQ(masks.label[i] == Region::kBackground, !buf.foreground(i));
    if (masks.label[i] == Region::kIgnore) EXPECT_LT(masks.view_cos[i], 0.1);
  }
}

TEST(Regions, RevisitingThePaintedViewHasNoNewPixels) {
  const Mesh m = fitted(make_uv_sphere(32, 16));
  const Camera cam = viewpoint_to_camera(make_viewpoint(0, 15, 1));
  const RasterBuffers buf = rasterize(m, cam);
  TextureAtlas atlas(256);
  const TexelMap map = build_texel_map(m, 256);
  project(Image(64, 64, {9, 9, 9}), m, buf, classify_regions(m, buf, atlas, cam), cam, map, atlas);
  const RegionCounts c = classify_regions(m, buf, atlas, cam).counts();
  EXPECT_EQ(c.fresh, 0u);
  EXPECT_EQ(c.update, 0u);
  EXPECT_GT(c.keep, 0u);
}

TEST(Regions, KeepMatchesTwoViewVisibilityOracle) {
  const Mesh cube = fitted(make_cube());
  const TexelMap map = build_texel_map(cube, 256);
  TextureAtlas atlas(256);
  const Camera cam1 = viewpoint_to_camera(make_viewpoint(45, 20, 1));
  const Camera cam2 = viewpoint_to_camera(make_viewpoint(135, 20, 1));
  const RasterBuffers buf1 = rasterize(cube, cam1), buf2 = rasterize(cube, cam2);
  project(Image(64, 64, {1, 2, 3}), cube, buf1, classify_regions(cube, buf1, atlas, cam1), cam1, map, atlas);
  const RegionMasks masks = classify_regions(cube, buf2, atlas, cam2);

  std::size_t checked = 0, agree = 0, keep = 0;
  for (std::size_t i = 0; i < masks.label.size(); ++i) {
    const Region r = masks.label[i];
    if (r == Region::kBackground || r == Region::kIgnore) continue;
    ++checked;
    const std::size_t t = uv_to_texel(pixel_uv(cube, buf2, i), 256);
    const auto f = static_cast<std::size_t>(map.face[t]);
    const Vec3& p = map.point[t];
    const bool seen = textailor::testing::point_visible(cube, cam1, f, p) &&
                      cube.face_normal(f).dot((cam1.position - p).normalized()) >= 0.1;
    const bool painted_label = r == Region::kKeep || r == Region::kUpdate;
    agree += painted_label == seen;
    keep += r == Region::kKeep;
  }
  ASSERT_GT(checked, 1000u);
  EXPECT_GT(keep, 300u);
  EXPECT_GE(static_cast<double>(agree) / checked, 0.995);
}

TEST(Regions, PaintingMoreNeverTurnsKeepIntoNew) {
  const Mesh m = fitted(make_uv_sphere(24, 12));
  const Camera cam = viewpoint_to_camera(make_viewpoint(80, -20, 1));
  const RasterBuffers buf = rasterize(m, cam);
  std::mt19937_64 rng(21);
  TextureAtlas atlas(128);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int round = 0; round < 5; ++round) {
    const RegionMasks before = classify_regions(m, buf, atlas, cam);
    for (std::size_t t = 0; t < atlas.texel_count(); ++t) {
      if (atlas.painted[t] || rng() % 4 != 0) continue;
      atlas.painted[t] = 1;
      atlas.best_cos[t] = u(rng);
    }
    const RegionMasks after = classify_regions(m, buf, atlas, cam);
    for (std::size_t i = 0; i < before.label.size(); ++i) {
      if (before.label[i] == Region::kKeep) EXPECT_NE(after.label[i], Region::kNew);
    }
  }
}

TEST(LatentMask, Examples) {
  const int w = 16, h = 8;
  std::vector<Region> keep(static_cast<std::size_t>(w) * h, Region::kKeep);
  EXPECT_EQ(to_latent_mask(keep, w, h, 4), std::vector<std::uint8_t>(8, 0));
  std::vector<Region> fresh(keep.size(), Region::kNew);
  EXPECT_EQ(to_latent_mask(fresh, w, h, 4), std::vector<std::uint8_t>(8, 1));
  std::vector<Region> one = keep;
  one[5 * w + 9] = Region::kNew;
  std::vector<std::uint8_t> expected(8, 0);
  expected[1 * 4 + 2] = 1;
  EXPECT_EQ(to_latent_mask(one, w, h, 4), expected);
  std::vector<Region> upd = keep;
  upd[0] = Region::kUpdate;
  upd[1] = Region::kBackground;
  EXPECT_EQ(to_latent_mask(upd, w, h, 4), std::vector<std::uint8_t>(8, 0));
  std::vector<Region> ign = keep;
  ign[w * h - 1] = Region::kIgnore;
  EXPECT_EQ(to_latent_mask(ign, w, h, 4).back(), 1);
}

TEST(LatentMask, RejectsIndivisibleSizes) {
  EXPECT_THROW(to_latent_mask(std::vector<Region>(30, Region::kKeep), 6, 5, 4), ShapeError);
  EXPECT_THROW(to_latent_mask(std::vector<Region>(10, Region::kKeep), 4, 4, 4), ShapeError);
}

TEST(LatentMask, ConservativeRuleIsIdempotent) {
  std::mt19937_64 rng(4);
  const Region all[] = {Region::kBackground, Region::kKeep, Region::kNew, Region::kUpdate, Region::kIgnore};
  for (int trial = 0; trial < 100; ++trial) {
    const int factor = 1 + static_cast<int>(rng() % 4);
    const int w = factor * (1 + static_cast<int>(rng() % 6)), h = factor * (1 + static_cast<int>(rng() % 6));
    std::vector<Region> labels(static_cast<std::size_t>(w) * h);
    const auto sparsity = rng() % 10;
    for (auto& l : labels) l = rng() % 10 < sparsity ? Region::kKeep : all[rng() % 5];
    const auto mask = to_latent_mask(labels, w, h, factor);
    const auto up = upsample_mask(mask, w / factor, h / factor, factor);
    EXPECT_EQ(to_latent_mask(up, w, h, factor), mask);
  }
}

TEST(Regions, LabelImageColoursEveryRegion) {
  RegionMasks m;
  m.width = 5;
  m.height = 1;
  m.label = {Region::kBackground, Region::kKeep, Region::kNew, Region::kUpdate, Region::kIgnore};
  const Image img = label_image(m);
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) EXPECT_NE(img.pixels[a], img.pixels[b]);
  }
  EXPECT_STREQ(region_name(Region::kNew), "new");
}
