#pragma once

#include <Eigen/Core>

#include "textailor/mesh.hpp"

namespace textailor {

/// Spherical camera placement: azimuth about +Y (0 deg on +Z, 90 deg on +X),
/// elevation above the XZ plane, distance from the origin.
struct Viewpoint {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double radius = 1.0;

  bool operator==(const Viewpoint&) const = default;
};

/// Wraps azimuth into [0,360) and validates elevation/radius.
Viewpoint make_viewpoint(double azimuth_deg, double elevation_deg, double radius);

struct Resolution {
  int width = 64;
  int height = 64;
};

inline constexpr double kDefaultFovDeg = 45.0;

struct Camera {
  Vec3 position;
  Vec3 right;
  Vec3 up;
  Vec3 forward;
  Eigen::Matrix4d view;        // world -> eye, OpenGL convention (eye looks down -Z)
  Eigen::Matrix4d projection;  // eye -> clip
  Resolution resolution;
  double fov_deg = kDefaultFovDeg;
  double near_plane = 0.01;
  double far_plane = 100.0;

  /// Distance along the optical axis; the quantity stored in depth buffers.
  double depth_of(const Vec3& world) const { return forward.dot(world - position); }

  /// Continuous pixel coordinates of a world point (pixel centres at +0.5).
  Vec2 project(const Vec3& world) const;

  /// Unit ray through the given continuous pixel coordinate.
  Vec3 ray_direction(double px, double py) const;
};

Vec3 viewpoint_position(const Viewpoint& v);

Camera viewpoint_to_camera(const Viewpoint& v, Resolution res = {},
                           double fov_deg = kDefaultFovDeg);

}  // namespace textailor
