#include "textailor/camera.hpp"

#include <cmath>
#include <numbers>

#include "textailor/error.hpp"

namespace textailor {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

Viewpoint make_viewpoint(double azimuth_deg, double elevation_deg, double radius) {
  if (!(radius > 0.0)) throw ConfigError("viewpoint radius must be positive");
  if (elevation_deg < -90.0 || elevation_deg > 90.0) {
    throw ConfigError("elevation must lie in [-90, 90]");
  }
  double az = std::fmod(azimuth_deg, 360.0);
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az = 0.0;
  return {az, elevation_deg, radius};
}

Vec3 viewpoint_position(const Viewpoint& v) {
  const double th = v.azimuth_deg * kDegToRad;
  const double ps = v.elevation_deg * kDegToRad;
  return v.radius * Vec3(std::cos(ps) * std::sin(th), std::sin(ps), std::cos(ps) * std::cos(th));
}

Camera viewpoint_to_camera(const Viewpoint& v, Resolution res, double fov_deg) {
  Camera cam;
  cam.resolution = res;
  cam.fov_deg = fov_deg;
  cam.position = viewpoint_position(v);
  cam.forward = (-cam.position).normalized();

  // d(position)/d(elevation) is perpendicular to the view axis and points
  // towards +Y, including at the poles where Y itself is degenerate.
  const double th = v.azimuth_deg * kDegToRad;
  const double ps = v.elevation_deg * kDegToRad;
  const Vec3 up_hint(-std::sin(ps) * std::sin(th), std::cos(ps), -std::sin(ps) * std::cos(th));
  cam.right = cam.forward.cross(up_hint).normalized();
  cam.up = cam.right.cross(cam.forward);

  cam.view.setIdentity();
  cam.view.block<1, 3>(0, 0) = cam.right.transpose();
  cam.view.block<1, 3>(1, 0) = cam.up.transpose();
  cam.view.block<1, 3>(2, 0) = -cam.forward.transpose();
  cam.view(0, 3) = -cam.right.dot(cam.position);
  cam.view(1, 3) = -cam.up.dot(cam.position);
  cam.view(2, 3) = cam.forward.dot(cam.position);

  const double f = 1.0 / std::tan(0.5 * fov_deg * kDegToRad);
  const double aspect = static_cast<double>(res.width) / res.height;
  const double n = cam.near_plane;
  const double fa = cam.far_plane;
  cam.projection.setZero();
  cam.projection(0, 0) = f / aspect;
  cam.projection(1, 1) = f;
  cam.projection(2, 2) = (fa + n) / (n - fa);
  cam.projection(2, 3) = 2.0 * fa * n / (n - fa);
  cam.projection(3, 2) = -1.0;
  return cam;
}

Vec2 Camera::project(const Vec3& world) const {
  const Vec3 d = world - position;
  const double z = forward.dot(d);
  const double f = 1.0 / std::tan(0.5 * fov_deg * kDegToRad);
  const double aspect = static_cast<double>(resolution.width) / resolution.height;
  const double ndc_x = (f / aspect) * right.dot(d) / z;
  const double ndc_y = f * up.dot(d) / z;
  return {0.5 * (ndc_x + 1.0) * resolution.width, 0.5 * (1.0 - ndc_y) * resolution.height};
}

Vec3 Camera::ray_direction(double px, double py) const {
  const double f = 1.0 / std::tan(0.5 * fov_deg * kDegToRad);
  const double aspect = static_cast<double>(resolution.width) / resolution.height;
  const double ndc_x = 2.0 * px / resolution.width - 1.0;
  const double ndc_y = 1.0 - 2.0 * py / resolution.height;
  return (forward + right * (ndc_x * aspect / f) + up * (ndc_y / f)).normalized();
}

}  // namespace textailor
