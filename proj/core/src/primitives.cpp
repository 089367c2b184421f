#include "textailor/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "textailor/error.hpp"

namespace textailor {

namespace {

void face_uvs_from_vertices(Mesh& m, const std::vector<Vec2>& vertex_uv) {
  m.uvs.clear();
  for (const auto& f : m.faces) m.uvs.push_back({vertex_uv[f[0]], vertex_uv[f[1]], vertex_uv[f[2]]});
}

}  // namespace

Mesh make_uv_sphere(int segments, int rings, double radius) {
  if (segments < 3 || rings < 2 || !(radius > 0.0)) throw ConfigError("uv sphere: bad resolution");
  Mesh m;
  std::vector<Vec2> uv;
  const double pi = std::numbers::pi;
  for (int i = 0; i <= rings; ++i) {
    const double lat = -pi / 2 + pi * i / rings;
    for (int j = 0; j <= segments; ++j) {
      const double lon = 2 * pi * j / segments;
      const Vec3 n(std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon));
      m.vertices.push_back(radius * n);
      m.normals.push_back(n);
      uv.emplace_back(static_cast<double>(j) / segments, static_cast<double>(i) / rings);
    }
  }
  const auto id = [segments](int i, int j) { return i * (segments + 1) + j; };
  for (int i = 0; i < rings; ++i) {
    for (int j = 0; j < segments; ++j) {
      const int a = id(i, j), b = id(i, j + 1), c = id(i + 1, j + 1), d = id(i + 1, j);
      if (i > 0) m.faces.push_back({a, b, c});
      if (i < rings - 1) m.faces.push_back({a, c, d});
    }
  }
  face_uvs_from_vertices(m, uv);
  return m;
}

Mesh make_icosphere(int subdivisions, double radius) {
  if (subdivisions < 0 || subdivisions > 6 || !(radius > 0.0)) throw ConfigError("icosphere: bad parameters");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    const auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  Mesh m;
  for (const auto& p : v) {
    m.vertices.push_back(radius * p);
    m.normals.push_back(p);
  }
  for (auto& tri : f) {
    const Vec3 n = (v[tri[1]] - v[tri[0]]).cross(v[tri[2]] - v[tri[0]]);
    if (n.dot(v[tri[0]] + v[tri[1]] + v[tri[2]]) < 0) std::swap(tri[1], tri[2]);
  }
  m.faces = std::move(f);
  assign_per_face_charts(m);
  return m;
}

Mesh make_cube(double h) {
  if (!(h > 0.0)) throw ConfigError("cube: half extent must be positive");
  struct Side {
    Vec3 n, u, v;
  };
  const Side sides[6] = {{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}},  {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},
                         {{0, 1, 0}, {1, 0, 0}, {0, 0, -1}},  {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
                         {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},   {{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}}};
  const double margin = 0.02;
  Mesh m;
  for (int s = 0; s < 6; ++s) {
    const auto& sd = sides[s];
    const int base = static_cast<int>(m.vertices.size());
    const Vec2 cell(static_cast<double>(s % 3) / 3.0, static_cast<double>(s / 3) / 2.0);
    const Vec2 extent(1.0 / 3.0, 0.5);
    const double corners[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    std::array<Vec2, 4> uv;
    for (int k = 0; k < 4; ++k) {
      m.vertices.push_back(h * (sd.n + corners[k][0] * sd.u + corners[k][1] * sd.v));
      m.normals.push_back(sd.n);
      const double a = corners[k][0] > 0 ? 1.0 - margin : margin;
      const double b = corners[k][1] > 0 ? 1.0 - margin : margin;
      uv[k] = Vec2(cell.x() + a * extent.x(), cell.y() + b * extent.y());
    }
    m.faces.push_back({base, base + 1, base + 2});
    m.uvs.push_back({uv[0], uv[1], uv[2]});
    m.faces.push_back({base, base + 2, base + 3});
    m.uvs.push_back({uv[0], uv[2], uv[3]});
  }
  return m;
}

Mesh make_quad(double h, double z) {
  if (!(h > 0.0)) throw ConfigError("quad: half extent must be positive");
  Mesh m;
  m.vertices = {{-h, -h, z}, {h, -h, z}, {h, h, z}, {-h, h, z}};
  m.normals.assign(4, Vec3(0, 0, 1));
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  const std::vector<Vec2> uv = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  face_uvs_from_vertices(m, uv);
  return m;
}

void assign_per_face_charts(Mesh& mesh) {
  const std::size_t n = mesh.faces.size();
  if (n == 0) {
    mesh.uvs.clear();
    return;
  }
  const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double cell = 1.0 / g;
  const double m = 0.08 * cell;
  mesh.uvs.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const double u0 = static_cast<double>(f % g) * cell;
    const double v0 = static_cast<double>(f / g) * cell;
    mesh.uvs[f] = {Vec2(u0 + m, v0 + m), Vec2(u0 + cell - m, v0 + m), Vec2(u0 + m, v0 + cell - m)};
  }
}

}  // namespace textailor
