#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "textailor/camera.hpp"
#include "textailor/mesh.hpp"

namespace textailor {

inline constexpr std::int32_t kNoFace = -1;

/// Per-pixel output of rasterize(). Background pixels carry kNoFace and
/// infinite depth; barycentrics are perspective-correct.
struct RasterBuffers {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::int32_t> face_id;
  std::vector<std::array<double, 3>> bary;
  std::vector<Vec3> pixel_normal;

  RasterBuffers() = default;
  RasterBuffers(int w, int h);

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool foreground(std::size_t i) const { return face_id[i] != kNoFace; }
  std::size_t foreground_count() const;
};

/// Z-buffered, back-face culled rasterization. Triangles with a vertex closer
/// than the near plane are dropped. Ties keep the lower face index.
RasterBuffers rasterize(const Mesh& mesh, const Camera& cam);

/// Interpolated UV of a foreground pixel.
Vec2 pixel_uv(const Mesh& mesh, const RasterBuffers& buffers, std::size_t i);

/// World-space surface point of a foreground pixel.
Vec3 pixel_point(const Mesh& mesh, const RasterBuffers& buffers, std::size_t i);

/// |cos| between the pixel normal and the direction towards the camera.
double view_cosine(const Mesh& mesh, const Camera& cam, const RasterBuffers& buffers,
                   std::size_t i);

}  // namespace textailor
