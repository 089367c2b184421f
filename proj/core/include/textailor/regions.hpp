#pragma once

#include <cstdint>
#include <vector>

#include "textailor/atlas.hpp"
#include "textailor/camera.hpp"
#include "textailor/raster.hpp"

namespace textailor {

enum class Region : std::uint8_t { kBackground = 0, kKeep, kNew, kUpdate, kIgnore };

const char* region_name(Region r);

struct RegionCounts {
  std::size_t keep = 0;
  std::size_t fresh = 0;  // "new"
  std::size_t update = 0;
  std::size_t ignore = 0;
  std::size_t background = 0;
};

/// Per-pixel region labels for one view plus the latent-resolution unknown mask.
struct RegionMasks {
  int width = 0;
  int height = 0;
  int factor = 1;
  std::vector<Region> label;
  std::vector<double> view_cos;           // 0 on background
  std::vector<std::uint8_t> latent_mask;  // (height/factor) x (width/factor), 1 = unknown

  int latent_width() const { return width / factor; }
  int latent_height() const { return height / factor; }
  RegionCounts counts() const;
};

struct RegionParams {
  double update_margin = 0.1;
  double grazing_cos = 0.1;
  int latent_factor = 4;
};

RegionMasks classify_regions(const Mesh& mesh, const RasterBuffers& buffers,
                             const TextureAtlas& atlas, const Camera& cam,
                             const RegionParams& params = {});

/// A latent cell is unknown iff any pixel it covers is NEW or IGNORE.
std::vector<std::uint8_t> to_latent_mask(const std::vector<Region>& labels, int width, int height,
                                         int factor);

/// Nearest-neighbour upsample of a latent mask back to pixel labels
/// (1 -> NEW, 0 -> KEEP).
std::vector<Region> upsample_mask(const std::vector<std::uint8_t>& mask, int latent_width,
                                  int latent_height, int factor);

/// Colour-coded label map for debugging.
Image label_image(const RegionMasks& masks);

}  // namespace textailor
