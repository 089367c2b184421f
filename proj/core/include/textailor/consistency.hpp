#pragma once

#include <optional>
#include <vector>

#include "textailor/atlas.hpp"
#include "textailor/camera.hpp"
#include "textailor/image.hpp"
#include "textailor/mesh.hpp"

namespace textailor {

struct ConsistencyParams {
  int per_hemisphere = 25;
  double elevation_up = 30.0;
  double elevation_down = -30.0;
  double radius = 1.0;
  double azimuth_offset = 0.0;
  int grid = 8;
  Resolution resolution{64, 64};
  double fov_deg = kDefaultFovDeg;
};

/// Evaluation ring: per_hemisphere cameras at each elevation, equally spaced
/// in azimuth starting at azimuth_offset.
std::vector<Viewpoint> evaluation_views(const ConsistencyParams& params);

/// grid x grid patch-mean colours of the foreground; empty patches are flagged.
struct PatchDescriptor {
  int grid = 0;
  std::vector<std::array<double, 3>> mean;
  std::vector<std::uint8_t> valid;
};

PatchDescriptor patch_descriptor(const Image& image, const std::vector<std::uint8_t>& foreground,
                                 int grid);

/// RMS colour distance over patches valid in both, scaled into [0,1];
/// nullopt when they share no patch.
std::optional<double> descriptor_distance(const PatchDescriptor& a, const PatchDescriptor& b);

/// Mean pairwise descriptor distance over all evaluation views; pairs without
/// a common patch are skipped.
double eval_consistency(const Mesh& mesh, const TextureAtlas& atlas,
                        const ConsistencyParams& params = {});

}  // namespace textailor
