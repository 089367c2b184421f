#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "textailor/camera.hpp"
#include "textailor/image.hpp"
#include "textailor/mesh.hpp"
#include "textailor/raster.hpp"

namespace textailor {

struct RegionMasks;

/// Colour used for texels that were never painted.
inline constexpr Rgb8 kUnpaintedColor = {255, 0, 255};

/// Square UV texture with coverage flags and the best view-cosine each texel
/// was painted from. best_cos > 0 exactly where painted.
struct TextureAtlas {
  int size = 0;
  std::vector<Rgb8> texels;
  std::vector<std::uint8_t> painted;
  std::vector<double> best_cos;

  TextureAtlas() = default;
  explicit TextureAtlas(int size);

  std::size_t index(int tx, int ty) const { return static_cast<std::size_t>(ty) * size + tx; }
  std::size_t texel_count() const { return texels.size(); }

  /// Marks every texel painted with colour c (best_cos 1).
  void fill(Rgb8 c);

  /// RGB with unpainted texels in kUnpaintedColor.
  Image to_image() const;

  bool operator==(const TextureAtlas&) const = default;
};

/// Nearest texel containing a UV coordinate; v = 0 is the bottom row.
std::size_t uv_to_texel(const Vec2& uv, int atlas_size);
Vec2 texel_center_uv(int tx, int ty, int atlas_size);

/// Surface sample behind each texel: the face whose UV triangle covers the
/// texel and the barycentric of the texel centre (clamped onto the triangle
/// for texels only partially overlapped). Texels no face touches have
/// face == kNoFace.
struct TexelMap {
  int size = 0;
  std::vector<std::int32_t> face;
  std::vector<std::array<double, 3>> bary;
  std::vector<Vec3> point;
  std::vector<double> weight;  // surface area represented by the texel
  std::size_t referenced = 0;

  bool referenced_at(std::size_t t) const { return face[t] != kNoFace; }
};

TexelMap build_texel_map(const Mesh& mesh, int atlas_size);

struct ProjectionStats {
  std::size_t written_new = 0;
  std::size_t written_update = 0;
};

/// Back-projects a generated view into the atlas. First every foreground
/// pixel offers its colour to the texel under its UV (highest view cosine
/// wins, then scan order); texels no pixel sampled then look up the pixel
/// their surface point projects into, if visible there (at silhouettes, the
/// nearest neighbouring pixel showing the same face). The pixel label
/// decides the write: NEW writes an unpainted texel (or a painted one seen
/// from a strictly better angle), UPDATE writes only from a strictly better
/// angle, KEEP writes only texels that are still unpainted, IGNORE and
/// BACKGROUND never write.
ProjectionStats project(const Image& image, const Mesh& mesh, const RasterBuffers& buffers,
                        const RegionMasks& labels, const Camera& cam, const TexelMap& map,
                        TextureAtlas& atlas);

struct CoverageStats {
  double painted_texel_fraction = 0.0;
  double painted_area_fraction = 0.0;
};

CoverageStats coverage_stats(const TextureAtlas& atlas, const TexelMap& map);

/// Faces none of whose referenced texels are painted.
std::vector<std::size_t> uncovered_faces(const TextureAtlas& atlas, const TexelMap& map,
                                         std::size_t face_count);

/// PNG with alpha = 255 on painted texels.
void save_atlas(const std::filesystem::path& path, const TextureAtlas& atlas);
TextureAtlas load_atlas(const std::filesystem::path& path);

void write_mtl(const std::filesystem::path& path, const std::string& texture_file);

}  // namespace textailor
