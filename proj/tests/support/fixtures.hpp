#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "textailor/mesh.hpp"

namespace textailor::testing {

std::filesystem::path data_dir();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

Mesh make_torus(int major_segments, int minor_segments, double major_radius, double minor_radius);
Mesh make_cylinder(int segments, double radius, double half_height);
Mesh make_tetrahedron(double radius);
/// UV sphere with radii perturbed by a smooth bump field.
Mesh make_bumpy_sphere(int segments, int rings, double radius, double amplitude);
/// Two parallel quads, the nearer one smaller, both facing +Z.
Mesh make_stacked_quads();

struct NamedMesh {
  std::string name;
  Mesh mesh;
};

/// Ten meshes of at most 200 faces with mixed topology and occlusion, scaled
/// into the default fit radius.
std::vector<NamedMesh> geometry_fixtures();

}  // namespace textailor::testing
