#include "textailor/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "textailor/error.hpp"
#include "textailor/regions.hpp"

namespace textailor {

TextureAtlas::TextureAtlas(int size_)
    : size(size_),
      texels(static_cast<std::size_t>(size_) * size_, kUnpaintedColor),
      painted(static_cast<std::size_t>(size_) * size_, 0),
      best_cos(static_cast<std::size_t>(size_) * size_, 0.0) {
  if (size_ <= 0 || (size_ & (size_ - 1)) != 0) {
    throw ConfigError("atlas size must be a positive power of two");
  }
}

void TextureAtlas::fill(Rgb8 c) {
  std::fill(texels.begin(), texels.end(), c);
  std::fill(painted.begin(), painted.end(), 1);
  std::fill(best_cos.begin(), best_cos.end(), 1.0);
}

Image TextureAtlas::to_image() const {
  Image img(size, size);
  for (std::size_t t = 0; t < texels.size(); ++t) img.pixels[t] = painted[t] ? texels[t] : kUnpaintedColor;
  return img;
}

std::size_t uv_to_texel(const Vec2& uv, int atlas_size) {
  const auto clamp_index = [atlas_size](double v) {
    const double s = std::floor(v * atlas_size);
    return static_cast<int>(std::clamp(s, 0.0, static_cast<double>(atlas_size - 1)));
  };
  const int tx = clamp_index(uv.x());
  const int ty = clamp_index(1.0 - uv.y());
  return static_cast<std::size_t>(ty) * atlas_size + tx;
}

Vec2 texel_center_uv(int tx, int ty, int atlas_size) {
  return {(tx + 0.5) / atlas_size, 1.0 - (ty + 0.5) / atlas_size};
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Barycentric of p in triangle (a, b, c); the triangle must be non-degenerate.
std::array<double, 3> barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = cross2(b - a, c - a);
  const double l0 = cross2(b - p, c - p) / area;
  const double l1 = cross2(c - p, a - p) / area;
  return {l0, l1, 1.0 - l0 - l1};
}

// Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
Vec2 closest_on_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec2 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec2 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// Separating-axis test between a triangle and the unit box at (tx, ty).
bool overlaps_box(const Vec2 tri[3], double tx, double ty) {
  const Vec2 corners[4] = {{tx, ty}, {tx + 1, ty}, {tx, ty + 1}, {tx + 1, ty + 1}};
  for (int e = 0; e < 3; ++e) {
    const Vec2 edge = tri[(e + 1) % 3] - tri[e];
    const Vec2 axis(-edge.y(), edge.x());
    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    for (int k = 0; k < 3; ++k) {
      const double d = axis.dot(tri[k]);
      tmin = std::min(tmin, d);
      tmax = std::max(tmax, d);
    }
    double bmin = std::numeric_limits<double>::infinity(), bmax = -bmin;
    for (const auto& q : corners) {
      const double d = axis.dot(q);
      bmin = std::min(bmin, d);
      bmax = std::max(bmax, d);
    }
    if (bmax < tmin || bmin > tmax) return false;
  }
  return true;
}

}  // namespace

TexelMap build_texel_map(const Mesh& mesh, int atlas_size) {
  TexelMap map;
  map.size = atlas_size;
  const std::size_t n = static_cast<std::size_t>(atlas_size) * atlas_size;
  map.face.assign(n, kNoFace);
  map.bary.assign(n, {0.0, 0.0, 0.0});
  map.point.assign(n, Vec3::Zero());
  map.weight.assign(n, 0.0);

  // Triangles in continuous texel coordinates (x right, y down).
  std::vector<std::array<Vec2, 3>> tris(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const Vec2& uv = mesh.uvs[f][k];
      tris[f][k] = Vec2(uv.x() * atlas_size, (1.0 - uv.y()) * atlas_size);
    }
  }
  const auto texel_range = [atlas_size](const std::array<Vec2, 3>& t) {
    const double lo_x = std::min({t[0].x(), t[1].x(), t[2].x()});
    const double hi_x = std::max({t[0].x(), t[1].x(), t[2].x()});
    const double lo_y = std::min({t[0].y(), t[1].y(), t[2].y()});
    const double hi_y = std::max({t[0].y(), t[1].y(), t[2].y()});
    const auto lo = [](double v) { return static_cast<int>(std::floor(v)); };
    return std::array<int, 4>{std::max(0, lo(lo_x)), std::min(atlas_size - 1, lo(hi_x)),
                              std::max(0, lo(lo_y)), std::min(atlas_size - 1, lo(hi_y))};
  };
  const auto degenerate = [](const std::array<Vec2, 3>& t) {
    return std::abs(cross2(t[1] - t[0], t[2] - t[0])) < 1e-12;
  };

  // Pass 1: texels whose centre lies inside a UV triangle; first face wins.
  for (std::size_t f = 0; f < tris.size(); ++f) {
    const auto& t = tris[f];
    if (degenerate(t)) continue;
    const auto [x0, x1, y0, y1] = texel_range(t);
    for (int ty = y0; ty <= y1; ++ty) {
      for (int tx = x0; tx <= x1; ++tx) {
        const std::size_t i = static_cast<std::size_t>(ty) * atlas_size + tx;
        if (map.face[i] != kNoFace) continue;
        const auto bc = barycentric(Vec2(tx + 0.5, ty + 0.5), t[0], t[1], t[2]);
        if (bc[0] < -1e-12 || bc[1] < -1e-12 || bc[2] < -1e-12) continue;
        map.face[i] = static_cast<std::int32_t>(f);
        map.bary[i] = bc;
      }
    }
  }

  // Pass 2: texels only partially overlapped take the nearest point of the
  // closest overlapping triangle, so every UV lookup lands on a surface sample.
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < tris.size(); ++f) {
    const auto& t = tris[f];
    if (degenerate(t)) continue;
    const auto [x0, x1, y0, y1] = texel_range(t);
    for (int ty = y0; ty <= y1; ++ty) {
      for (int tx = x0; tx <= x1; ++tx) {
        const std::size_t i = static_cast<std::size_t>(ty) * atlas_size + tx;
        if (map.face[i] != kNoFace && std::isinf(best[i])) continue;  // claimed in pass 1
        if (!overlaps_box(t.data(), tx, ty)) continue;
        const Vec2 centre(tx + 0.5, ty + 0.5);
        const Vec2 q = closest_on_triangle(centre, t[0], t[1], t[2]);
        const double dist = (q - centre).squaredNorm();
        if (!(dist < best[i])) continue;
        best[i] = dist;
        auto bc = barycentric(q, t[0], t[1], t[2]);
        for (auto& b : bc) b = std::max(0.0, b);
        const double sum = bc[0] + bc[1] + bc[2];
        for (auto& b : bc) b /= sum;
        map.face[i] = static_cast<std::int32_t>(f);
        map.bary[i] = bc;
      }
    }
  }

  std::vector<std::size_t> per_face(mesh.faces.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (map.face[i] == kNoFace) continue;
    ++map.referenced;
    const auto f = static_cast<std::size_t>(map.face[i]);
    ++per_face[f];
    const auto& idx = mesh.faces[f];
    const auto& bc = map.bary[i];
    map.point[i] = bc[0] * mesh.vertices[idx[0]] + bc[1] * mesh.vertices[idx[1]] +
                   bc[2] * mesh.vertices[idx[2]];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (map.face[i] == kNoFace) continue;
    const auto f = static_cast<std::size_t>(map.face[i]);
    map.weight[i] = mesh.face_area(f) / static_cast<double>(per_face[f]);
  }
  return map;
}

ProjectionStats project(const Image& image, const Mesh& mesh, const RasterBuffers& buffers,
                        const RegionMasks& labels, const Camera& cam, const TexelMap& map,
                        TextureAtlas& atlas) {
  if (image.width != buffers.width || image.height != buffers.height ||
      labels.width != buffers.width || labels.height != buffers.height) {
    throw ShapeError("project: image, buffers and labels must share a resolution");
  }
  if (map.size != atlas.size) throw ShapeError("project: texel map does not match atlas");
  const auto should_write = [&atlas](Region label, double c, std::size_t t) {
    if (label == Region::kNew) return !atlas.painted[t] || c > atlas.best_cos[t];
    if (label == Region::kUpdate) return c > atlas.best_cos[t];
    // Several texels share a pixel; the label follows the pixel centre, so
    // still-unpainted texels under KEEP pixels take the (known) pixel colour.
    if (label == Region::kKeep) return !atlas.painted[t];
    return false;
  };
  ProjectionStats stats;
  const auto write = [&](std::size_t t, Rgb8 color, double c) {
    (atlas.painted[t] ? stats.written_update : stats.written_new) += 1;
    atlas.texels[t] = color;
    atlas.painted[t] = 1;
    atlas.best_cos[t] = c;
  };

  // Scatter: every foreground pixel offers its colour to the texel under its
  // UV; the highest view cosine wins, then the first pixel in scan order.
  std::vector<std::int64_t> claim(map.face.size(), -1);
  for (std::size_t i = 0; i < buffers.face_id.size(); ++i) {
    if (buffers.face_id[i] == kNoFace) continue;
    const std::size_t t = uv_to_texel(pixel_uv(mesh, buffers, i), atlas.size);
    if (!should_write(labels.label[i], labels.view_cos[i], t)) continue;
    if (claim[t] < 0 || labels.view_cos[i] > labels.view_cos[static_cast<std::size_t>(claim[t])]) {
      claim[t] = static_cast<std::int64_t>(i);
    }
  }
  for (std::size_t t = 0; t < claim.size(); ++t) {
    if (claim[t] < 0) continue;
    const auto i = static_cast<std::size_t>(claim[t]);
    write(t, image.pixels[i], labels.view_cos[i]);
  }

  // Gather: texels no pixel sampled look up the pixel their surface point
  // projects into.
  constexpr double kDepthTolerance = 1e-3;
  // World size of one pixel at unit depth.
  const double pixel_scale = 2.0 * std::tan(cam.fov_deg * std::numbers::pi / 360.0) / buffers.height;
  for (std::size_t t = 0; t < map.face.size(); ++t) {
    if (map.face[t] == kNoFace || claim[t] >= 0) continue;
    const auto f = static_cast<std::size_t>(map.face[t]);
    const Vec3& p = map.point[t];
    const auto& idx = mesh.faces[f];
    const Vec3 n = (mesh.vertices[idx[1]] - mesh.vertices[idx[0]])
                       .cross(mesh.vertices[idx[2]] - mesh.vertices[idx[0]]);
    const Vec3 to_cam = cam.position - p;
    const double facing = n.dot(to_cam);
    if (facing <= 0.0) continue;
    const double d = cam.depth_of(p);
    if (d < cam.near_plane) continue;
    const Vec2 s = cam.project(p);
    const int px = static_cast<int>(std::floor(s.x()));
    const int py = static_cast<int>(std::floor(s.y()));
    if (px < 0 || py < 0 || px >= buffers.width || py >= buffers.height) continue;
    std::size_t i = buffers.index(px, py);
    if (buffers.face_id[i] == kNoFace) {
      // Silhouette texel whose pixel centre misses the mesh: borrow the
      // nearest neighbouring pixel that shows the same face.
      double best = std::numeric_limits<double>::infinity();
      std::size_t found = i;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int qx = px + dx, qy = py + dy;
          if (qx < 0 || qy < 0 || qx >= buffers.width || qy >= buffers.height) continue;
          const std::size_t q = buffers.index(qx, qy);
          if (buffers.face_id[q] != static_cast<std::int32_t>(f)) continue;
          const double dist = (Vec2(qx + 0.5, qy + 0.5) - s).squaredNorm();
          if (dist < best) {
            best = dist;
            found = q;
          }
        }
      }
      if (found == i) continue;
      i = found;
    }
    // The z-buffer holds the depth at the pixel centre; a tilted surface
    // changes depth by about one pixel footprint over cos(incidence).
    const double incidence = facing / (n.norm() * to_cam.norm());
    const double tolerance =
        std::max(kDepthTolerance * d, pixel_scale * d / std::max(incidence, 0.25));
    const bool visible = static_cast<std::size_t>(buffers.face_id[i]) == f ||
                         std::abs(buffers.depth[i] - d) <= tolerance;
    if (!visible) continue;
    if (!should_write(labels.label[i], labels.view_cos[i], t)) continue;
    write(t, image.pixels[i], labels.view_cos[i]);
  }
  return stats;
}

CoverageStats coverage_stats(const TextureAtlas& atlas, const TexelMap& map) {
  if (map.size != atlas.size) throw ShapeError("coverage_stats: texel map does not match atlas");
  double painted_w = 0.0, total_w = 0.0;
  std::size_t painted_n = 0;
  for (std::size_t t = 0; t < map.face.size(); ++t) {
    if (map.face[t] == kNoFace) continue;
    total_w += map.weight[t];
    if (atlas.painted[t]) {
      ++painted_n;
      painted_w += map.weight[t];
    }
  }
  CoverageStats s;
  if (map.referenced > 0) s.painted_texel_fraction = static_cast<double>(painted_n) / map.referenced;
  if (total_w > 0.0) s.painted_area_fraction = painted_w / total_w;
  return s;
}

std::vector<std::size_t> uncovered_faces(const TextureAtlas& atlas, const TexelMap& map,
                                         std::size_t face_count) {
  std::vector<std::uint8_t> touched(face_count, 0), has_texel(face_count, 0);
  for (std::size_t t = 0; t < map.face.size(); ++t) {
    if (map.face[t] == kNoFace) continue;
    const auto f = static_cast<std::size_t>(map.face[t]);
    has_texel[f] = 1;
    if (atlas.painted[t]) touched[f] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < face_count; ++f) {
    if (has_texel[f] && !touched[f]) out.push_back(f);
  }
  return out;
}

void save_atlas(const std::filesystem::path& path, const TextureAtlas& atlas) {
  std::vector<std::uint8_t> alpha(atlas.painted.size());
  for (std::size_t t = 0; t < alpha.size(); ++t) alpha[t] = atlas.painted[t] ? 255 : 0;
  write_png_rgba(path, atlas.to_image(), alpha);
}

TextureAtlas load_atlas(const std::filesystem::path& path) {
  const RgbaImage img = read_png(path);
  if (img.rgb.width != img.rgb.height) throw ShapeError("atlas image must be square");
  TextureAtlas atlas(img.rgb.width);
  for (std::size_t t = 0; t < atlas.texels.size(); ++t) {
    if (img.alpha[t] == 0) continue;
    atlas.texels[t] = img.rgb.pixels[t];
    atlas.painted[t] = 1;
    atlas.best_cos[t] = 1.0;  // the angle cache is not persisted
  }
  return atlas;
}

void write_mtl(const std::filesystem::path& path, const std::string& texture_file) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "newmtl textured\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\nmap_Kd " << texture_file << '\n';
}

}  // namespace textailor
