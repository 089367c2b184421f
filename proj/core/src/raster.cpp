#include "textailor/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace textailor {

RasterBuffers::RasterBuffers(int w, int h)
    : width(w),
      height(h),
      depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity()),
      face_id(static_cast<std::size_t>(w) * h, kNoFace),
      bary(static_cast<std::size_t>(w) * h, {0.0, 0.0, 0.0}),
      pixel_normal(static_cast<std::size_t>(w) * h, Vec3::Zero()) {}

std::size_t RasterBuffers::foreground_count() const {
  return static_cast<std::size_t>(std::count_if(face_id.begin(), face_id.end(),
                                                [](std::int32_t f) { return f != kNoFace; }));
}

RasterBuffers rasterize(const Mesh& mesh, const Camera& cam) {
  const int W = cam.resolution.width;
  const int H = cam.resolution.height;
  RasterBuffers out(W, H);

  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& idx = mesh.faces[f];
    const Vec3& a = mesh.vertices[idx[0]];
    const Vec3& b = mesh.vertices[idx[1]];
    const Vec3& c = mesh.vertices[idx[2]];

    const Vec3 n = (b - a).cross(c - a);
    if (n.dot(cam.position - a) <= 0.0) continue;  // back-facing or edge-on

    const double z[3] = {cam.depth_of(a), cam.depth_of(b), cam.depth_of(c)};
    if (z[0] < cam.near_plane || z[1] < cam.near_plane || z[2] < cam.near_plane) continue;

    const Vec2 s[3] = {cam.project(a), cam.project(b), cam.project(c)};
    const double area = (s[1] - s[0]).x() * (s[2] - s[0]).y() - (s[1] - s[0]).y() * (s[2] - s[0]).x();
    if (area == 0.0) continue;
    const double inv_area = 1.0 / area;

    const double min_x = std::min({s[0].x(), s[1].x(), s[2].x()});
    const double max_x = std::max({s[0].x(), s[1].x(), s[2].x()});
    const double min_y = std::min({s[0].y(), s[1].y(), s[2].y()});
    const double max_y = std::max({s[0].y(), s[1].y(), s[2].y()});
    const int x0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(max_x - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(max_y - 0.5)));

    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        // Edge functions, normalised so that all three are >= 0 inside.
        const double l0 = ((s[1].x() - px) * (s[2].y() - py) - (s[1].y() - py) * (s[2].x() - px)) * inv_area;
        const double l1 = ((s[2].x() - px) * (s[0].y() - py) - (s[2].y() - py) * (s[0].x() - px)) * inv_area;
        const double l2 = 1.0 - l0 - l1;
        if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;

        const double q0 = l0 / z[0];
        const double q1 = l1 / z[1];
        const double q2 = l2 / z[2];
        const double inv_depth = q0 + q1 + q2;
        const double d = 1.0 / inv_depth;
        const std::size_t i = out.index(x, y);
        if (!(d < out.depth[i])) continue;

        out.depth[i] = d;
        out.face_id[i] = static_cast<std::int32_t>(f);
        out.bary[i] = {q0 * d, q1 * d, q2 * d};
      }
    }
  }

  for (std::size_t i = 0; i < out.face_id.size(); ++i) {
    if (out.face_id[i] == kNoFace) continue;
    const auto& idx = mesh.faces[static_cast<std::size_t>(out.face_id[i])];
    const auto& bc = out.bary[i];
    const Vec3 nrm = bc[0] * mesh.normals[idx[0]] + bc[1] * mesh.normals[idx[1]] +
                     bc[2] * mesh.normals[idx[2]];
    const double len = nrm.norm();
    out.pixel_normal[i] = len > 0.0 ? Vec3(nrm / len)
                                    : mesh.face_normal(static_cast<std::size_t>(out.face_id[i]));
  }
  return out;
}

Vec2 pixel_uv(const Mesh& mesh, const RasterBuffers& buffers, std::size_t i) {
  const auto& uv = mesh.uvs[static_cast<std::size_t>(buffers.face_id[i])];
  const auto& bc = buffers.bary[i];
  return bc[0] * uv[0] + bc[1] * uv[1] + bc[2] * uv[2];
}

Vec3 pixel_point(const Mesh& mesh, const RasterBuffers& buffers, std::size_t i) {
  const auto& idx = mesh.faces[static_cast<std::size_t>(buffers.face_id[i])];
  const auto& bc = buffers.bary[i];
  return bc[0] * mesh.vertices[idx[0]] + bc[1] * mesh.vertices[idx[1]] +
         bc[2] * mesh.vertices[idx[2]];
}

double view_cosine(const Mesh& mesh, const Camera& cam, const RasterBuffers& buffers,
                   std::size_t i) {
  const Vec3 to_cam = (cam.position - pixel_point(mesh, buffers, i)).normalized();
  return std::min(1.0, std::abs(to_cam.dot(buffers.pixel_normal[i])));
}

}  // namespace textailor
