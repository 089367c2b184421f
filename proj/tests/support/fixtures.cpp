#include "fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "textailor/primitives.hpp"

namespace textailor::testing {

std::filesystem::path data_dir() { return TEXTAILOR_TEST_DATA_DIR; }

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("textailor_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

namespace {

// Grid of (rows+1) x (cols+1) vertices from a parametric surface, with
// counter-clockwise faces when seen from the side `pos` bulges towards.
template <typename Pos>
Mesh parametric_grid(int rows, int cols, Pos pos) {
  Mesh m;
  std::vector<Vec2> uv;
  for (int i = 0; i <= rows; ++i) {
    for (int j = 0; j <= cols; ++j) {
      const double u = static_cast<double>(j) / cols, v = static_cast<double>(i) / rows;
      m.vertices.push_back(pos(u, v));
      uv.emplace_back(u, v);
    }
  }
  const auto id = [cols](int i, int j) { return i * (cols + 1) + j; };
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int a = id(i, j), b = id(i, j + 1), c = id(i + 1, j + 1), d = id(i + 1, j);
      m.faces.push_back({a, b, c});
      m.uvs.push_back({uv[a], uv[b], uv[c]});
      m.faces.push_back({a, c, d});
      m.uvs.push_back({uv[a], uv[c], uv[d]});
    }
  }
  compute_vertex_normals(m);
  return m;
}

}  // namespace

Mesh make_torus(int major_segments, int minor_segments, double R, double r) {
  const double tau = 2.0 * std::numbers::pi;
  // u runs around the tube, v around the main ring.
  return parametric_grid(major_segments, minor_segments, [=](double u, double v) {
    const double a = tau * v, b = tau * u;
    return Vec3((R + r * std::cos(b)) * std::sin(a), -r * std::sin(b), (R + r * std::cos(b)) * std::cos(a));
  });
}

Mesh make_cylinder(int segments, double radius, double half_height) {
  const double tau = 2.0 * std::numbers::pi;
  return parametric_grid(4, segments, [=](double u, double v) {
    const double a = tau * u;
    return Vec3(radius * std::sin(a), -half_height + 2.0 * half_height * v, radius * std::cos(a));
  });
}

Mesh make_tetrahedron(double radius) {
  Mesh m;
  const double s = radius / std::sqrt(3.0);
  m.vertices = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  for (auto& f : m.faces) {
    const Vec3 n = (m.vertices[f[1]] - m.vertices[f[0]]).cross(m.vertices[f[2]] - m.vertices[f[0]]);
    if (n.dot(m.vertices[f[0]]) < 0) std::swap(f[1], f[2]);
  }
  assign_per_face_charts(m);
  compute_vertex_normals(m);
  return m;
}

Mesh make_bumpy_sphere(int segments, int rings, double radius, double amplitude) {
  Mesh m = make_uv_sphere(segments, rings, 1.0);
  for (auto& p : m.vertices) {
    const double bump = 1.0 + amplitude * std::sin(5 * p.x()) * std::cos(4 * p.y()) * std::sin(3 * p.z() + 1);
    p *= radius * bump;
  }
  compute_vertex_normals(m);
  return m;
}

Mesh make_stacked_quads() {
  Mesh back = make_quad(0.3, -0.1);
  Mesh front = make_quad(0.15, 0.1);
  const int base = static_cast<int>(back.vertices.size());
  for (std::size_t i = 0; i < front.vertices.size(); ++i) {
    back.vertices.push_back(front.vertices[i]);
    back.normals.push_back(front.normals[i]);
  }
  for (std::size_t f = 0; f < front.faces.size(); ++f) {
    const auto& tri = front.faces[f];
    back.faces.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
    back.uvs.push_back(front.uvs[f]);
  }
  assign_per_face_charts(back);
  return back;
}

std::vector<NamedMesh> geometry_fixtures() {
  std::vector<NamedMesh> out;
  const auto add = [&](std::string name, Mesh m) {
    normalize_to_sphere(m, kDefaultFitRadius);
    out.push_back({std::move(name), std::move(m)});
  };
  add("uv_sphere", make_uv_sphere(12, 8));
  add("icosphere0", make_icosphere(0));
  add("icosphere1", make_icosphere(1));
  add("cube", make_cube());
  add("torus", make_torus(12, 8, 1.0, 0.35));
  add("cylinder", make_cylinder(16, 0.6, 1.0));
  add("tetrahedron", make_tetrahedron(1.0));
  add("bumpy_sphere", make_bumpy_sphere(12, 8, 1.0, 0.15));
  add("stacked_quads", make_stacked_quads());
  add("quad", make_quad(0.5));
  return out;
}

}  // namespace textailor::testing
