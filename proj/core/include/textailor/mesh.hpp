#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace textailor {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Triangle mesh with per-vertex normals and per-face-corner UVs.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec3> normals;                  // one per vertex
  std::vector<std::array<Vec2, 3>> uvs;       // one triple per face

  std::size_t face_count() const { return faces.size(); }
  bool empty() const { return faces.empty(); }

  Vec3 face_normal(std::size_t f) const;
  double face_area(std::size_t f) const;
};

/// Radius of the sphere that load_mesh() fits geometry into. Small enough
/// that a whole object stays inside a 45 degree frustum from radius 1.
inline constexpr double kDefaultFitRadius = 0.35;

struct LoadOptions {
  double fit_radius = kDefaultFitRadius;
  bool normalize = true;
};

/// Parses a Wavefront OBJ (v/vt/vn/f). Polygons are fan-triangulated.
/// Vertices are split per (position, normal) pair so that supplied normals
/// survive; missing normals are rebuilt from area-weighted face normals.
Mesh load_mesh(const std::filesystem::path& path, const LoadOptions& options = {});
Mesh parse_obj(const std::string& text, const LoadOptions& options = {});

/// Translates the bounding-box centre to the origin and scales so the farthest
/// vertex sits at `radius`.
void normalize_to_sphere(Mesh& mesh, double radius);

/// Area-weighted vertex normals.
void compute_vertex_normals(Mesh& mesh);

/// Checks index ranges, normal length and UV count; throws Error on violation.
void validate(const Mesh& mesh);

/// Writes positions, UVs and normals. When `mtl_name` is non-empty a mtllib /
/// usemtl pair is emitted referencing material "textured".
void write_obj(const std::filesystem::path& path, const Mesh& mesh,
               const std::string& mtl_name = {});

}  // namespace textailor
