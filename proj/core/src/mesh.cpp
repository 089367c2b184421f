#include "textailor/mesh.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "textailor/error.hpp"

namespace textailor {

Vec3 Mesh::face_normal(std::size_t f) const {
  const auto& [a, b, c] = faces[f];
  const Vec3 n = (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double Mesh::face_area(std::size_t f) const {
  const auto& [a, b, c] = faces[f];
  return 0.5 * (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]).norm();
}

namespace {

struct CornerRef {
  int v = 0;
  int vt = 0;
  int vn = 0;  // 0 when absent
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  // from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(value)) {
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  }
  return value;
}

// Resolves a 1-based (or negative, relative) OBJ index to 1-based absolute.
int resolve_index(std::string_view tok, std::size_t count, std::size_t line, const char* what) {
  int value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError(std::string("invalid ") + what + " index '" + std::string(tok) + "'", line);
  }
  if (value == 0) throw ParseError(std::string(what) + " index 0 (OBJ indices are 1-based)", line);
  const long long absolute = value > 0 ? value : static_cast<long long>(count) + value + 1;
  if (absolute < 1 || absolute > static_cast<long long>(count)) {
    throw ParseError(std::string(what) + " index " + std::string(tok) + " out of range", line);
  }
  return static_cast<int>(absolute);
}

CornerRef parse_corner(std::string_view tok, std::size_t nv, std::size_t nvt, std::size_t nvn,
                       std::size_t line) {
  std::string_view parts[3];
  int n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= tok.size(); ++i) {
    if (i == tok.size() || tok[i] == '/') {
      if (n == 3) throw ParseError("malformed face corner '" + std::string(tok) + "'", line);
      parts[n++] = tok.substr(start, i - start);
      start = i + 1;
    }
  }
  CornerRef c;
  c.v = resolve_index(parts[0], nv, line, "vertex");
  if (n < 2 || parts[1].empty()) {
    throw MissingUvError("line " + std::to_string(line) + ": face corner without texture coordinate");
  }
  c.vt = resolve_index(parts[1], nvt, line, "texture");
  if (n == 3 && !parts[2].empty()) c.vn = resolve_index(parts[2], nvn, line, "normal");
  return c;
}

}  // namespace

Mesh parse_obj(const std::string& text, const LoadOptions& options) {
  std::vector<Vec3> positions;
  std::vector<Vec2> texcoords;
  std::vector<Vec3> file_normals;
  std::vector<std::array<CornerRef, 3>> triangles;
  bool any_missing_normal = false;

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string_view key = tok[0];
    if (key == "v") {
      if (tok.size() < 4) throw ParseError("vertex needs 3 coordinates", line_no);
      positions.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                             parse_double(tok[3], line_no));
    } else if (key == "vt") {
      if (tok.size() < 3) throw ParseError("texture coordinate needs 2 components", line_no);
      texcoords.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no));
    } else if (key == "vn") {
      if (tok.size() < 4) throw ParseError("normal needs 3 components", line_no);
      file_normals.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                parse_double(tok[3], line_no));
    } else if (key == "f") {
      if (tok.size() < 4) throw ParseError("face needs at least 3 corners", line_no);
      std::vector<CornerRef> corners;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        corners.push_back(parse_corner(tok[i], positions.size(), texcoords.size(),
                                       file_normals.size(), line_no));
        if (corners.back().vn == 0) any_missing_normal = true;
      }
      for (std::size_t i = 1; i + 1 < corners.size(); ++i) {
        triangles.push_back({corners[0], corners[i], corners[i + 1]});
      }
    }
    // Other statements (o, g, s, usemtl, mtllib, l, p) carry nothing we need.
  }

  Mesh mesh;
  const bool use_file_normals = !file_normals.empty() && !any_missing_normal;
  std::map<std::pair<int, int>, int> remap;  // (v, vn) -> vertex
  for (const auto& tri : triangles) {
    Face face{};
    std::array<Vec2, 3> uv;
    for (int k = 0; k < 3; ++k) {
      const auto key = std::make_pair(tri[k].v, use_file_normals ? tri[k].vn : 0);
      auto [it, inserted] = remap.emplace(key, static_cast<int>(mesh.vertices.size()));
      if (inserted) {
        mesh.vertices.push_back(positions[tri[k].v - 1]);
        if (use_file_normals) {
          const Vec3 n = file_normals[tri[k].vn - 1];
          mesh.normals.push_back(n.norm() > 0.0 ? Vec3(n.normalized()) : Vec3::UnitY());
        }
      }
      face[k] = it->second;
      uv[k] = texcoords[tri[k].vt - 1];
    }
    mesh.faces.push_back(face);
    mesh.uvs.push_back(uv);
  }
  if (!use_file_normals) compute_vertex_normals(mesh);
  if (options.normalize && !mesh.vertices.empty()) normalize_to_sphere(mesh, options.fit_radius);
  validate(mesh);
  return mesh;
}

Mesh load_mesh(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open mesh " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_obj(ss.str(), options);
}

void normalize_to_sphere(Mesh& mesh, double radius) {
  if (mesh.vertices.empty()) return;
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 centre = 0.5 * (lo + hi);
  double far = 0.0;
  for (const auto& v : mesh.vertices) far = std::max(far, (v - centre).norm());
  const double scale = far > 0.0 ? radius / far : 1.0;
  for (auto& v : mesh.vertices) v = (v - centre) * scale;
}

void compute_vertex_normals(Mesh& mesh) {
  mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (const auto& [a, b, c] : mesh.faces) {
    // Unnormalised cross product is twice the area times the unit normal.
    const Vec3 n = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
    mesh.normals[a] += n;
    mesh.normals[b] += n;
    mesh.normals[c] += n;
  }
  for (auto& n : mesh.normals) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::UnitY();
  }
}

void validate(const Mesh& mesh) {
  const auto nv = static_cast<int>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= nv) throw Error("face index out of range");
    }
  }
  if (mesh.normals.size() != mesh.vertices.size()) throw Error("normal count != vertex count");
  for (const auto& n : mesh.normals) {
    if (std::abs(n.norm() - 1.0) > 1e-6) throw Error("normal is not unit length");
  }
  if (mesh.uvs.size() != mesh.faces.size()) throw MissingUvError("missing per-face UVs");
}

void write_obj(const std::filesystem::path& path, const Mesh& mesh, const std::string& mtl_name) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(9);
  if (!mtl_name.empty()) out << "mtllib " << mtl_name << "\nusemtl textured\n";
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& n : mesh.normals) out << "vn " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
  for (const auto& tri : mesh.uvs) {
    for (const auto& uv : tri) out << "vt " << uv.x() << ' ' << uv.y() << '\n';
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    out << 'f';
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.faces[f][k] + 1;
      out << ' ' << v << '/' << (3 * f + k + 1) << '/' << v;
    }
    out << '\n';
  }
}

}  // namespace textailor
