#pragma once

#include "textailor/mesh.hpp"

namespace textailor {

/// Latitude/longitude sphere of the given radius with a continuous UV layout
/// (u around the equator, v from south to north pole).
Mesh make_uv_sphere(int segments, int rings, double radius = 1.0);

/// Subdivided icosahedron. Each face gets its own right-triangle chart in a
/// square grid so the UV layout has no wrap-around seams.
Mesh make_icosphere(int subdivisions, double radius = 1.0);

/// Axis-aligned cube, 24 vertices with axis normals, one UV chart per side.
Mesh make_cube(double half_extent = 0.5);

/// Two-triangle square in the XY plane facing +Z.
Mesh make_quad(double half_extent, double z = 0.0);

/// Packs every face into its own cell of a square grid.
void assign_per_face_charts(Mesh& mesh);

}  // namespace textailor
