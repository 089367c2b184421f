#include "textailor/consistency.hpp"

#include <cmath>
#include <future>

#include "textailor/error.hpp"
#include "textailor/raster.hpp"
#include "textailor/render.hpp"

namespace textailor {

std::vector<Viewpoint> evaluation_views(const ConsistencyParams& p) {
  if (p.per_hemisphere < 1) throw ConfigError("consistency: per_hemisphere must be >= 1");
  std::vector<Viewpoint> views;
  for (double el : {p.elevation_up, p.elevation_down}) {
    for (int i = 0; i < p.per_hemisphere; ++i) {
      views.push_back(make_viewpoint(p.azimuth_offset + 360.0 * i / p.per_hemisphere, el, p.radius));
    }
  }
  return views;
}

PatchDescriptor patch_descriptor(const Image& image, const std::vector<std::uint8_t>& foreground, int grid) {
  if (grid < 1) throw ConfigError("patch grid must be >= 1");
  if (foreground.size() != image.pixels.size()) throw ShapeError("foreground mask does not match image");
  PatchDescriptor d;
  d.grid = grid;
  d.mean.assign(static_cast<std::size_t>(grid) * grid, {0.0, 0.0, 0.0});
  d.valid.assign(d.mean.size(), 0);
  std::vector<std::size_t> count(d.mean.size(), 0);
  for (int y = 0; y < image.height; ++y) {
    const int py = y * grid / image.height;
    for (int x = 0; x < image.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * image.width + x;
      if (!foreground[i]) continue;
      const std::size_t cell = static_cast<std::size_t>(py) * grid + x * grid / image.width;
      for (int c = 0; c < 3; ++c) d.mean[cell][c] += to_unit(image.pixels[i][c]);
      ++count[cell];
    }
  }
  for (std::size_t k = 0; k < d.mean.size(); ++k) {
    if (count[k] == 0) continue;
    d.valid[k] = 1;
    for (double& v : d.mean[k]) v /= static_cast<double>(count[k]);
  }
  return d;
}

std::optional<double> descriptor_distance(const PatchDescriptor& a, const PatchDescriptor& b) {
  if (a.grid != b.grid) throw ShapeError("descriptor grids differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.mean.size(); ++k) {
    if (!a.valid[k] || !b.valid[k]) continue;
    for (int c = 0; c < 3; ++c) {
      const double d = a.mean[k][c] - b.mean[k][c];
      sum += d * d;
    }
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::sqrt(sum / (3.0 * static_cast<double>(n)));
}

double eval_consistency(const Mesh& mesh, const TextureAtlas& atlas, const ConsistencyParams& params) {
  const auto views = evaluation_views(params);
  std::vector<std::future<PatchDescriptor>> jobs;
  jobs.reserve(views.size());
  for (const auto& v : views) {
    jobs.push_back(std::async(std::launch::async, [&mesh, &atlas, &params, v] {
      const Camera cam = viewpoint_to_camera(v, params.resolution, params.fov_deg);
      const RasterBuffers buf = rasterize(mesh, cam);
      const Image img = render_textured(mesh, atlas, cam, buf, {0, 0, 0});
      std::vector<std::uint8_t> fg(buf.face_id.size());
      for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = buf.foreground(i) ? 1 : 0;
      return patch_descriptor(img, fg, params.grid);
    }));
  }
  std::vector<PatchDescriptor> desc;
  desc.reserve(jobs.size());
  for (auto& j : jobs) desc.push_back(j.get());

  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < desc.size(); ++i) {
    for (std::size_t j = i + 1; j < desc.size(); ++j) {
      if (auto d = descriptor_distance(desc[i], desc[j])) {
        sum += *d;
        ++pairs;
      }
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

}  // namespace textailor
