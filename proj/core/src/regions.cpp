#include "textailor/regions.hpp"

#include "textailor/error.hpp"

namespace textailor {

const char* region_name(Region r) {
  switch (r) {
    case Region::kBackground: return "background";
    case Region::kKeep: return "keep";
    case Region::kNew: return "new";
    case Region::kUpdate: return "update";
    case Region::kIgnore: return "ignore";
  }
  return "?";
}

RegionCounts RegionMasks::counts() const {
  RegionCounts c;
  for (Region r : label) {
    switch (r) {
      case Region::kBackground: ++c.background; break;
      case Region::kKeep: ++c.keep; break;
      case Region::kNew: ++c.fresh; break;
      case Region::kUpdate: ++c.update; break;
      case Region::kIgnore: ++c.ignore; break;
    }
  }
  return c;
}

RegionMasks classify_regions(const Mesh& mesh, const RasterBuffers& buffers,
                             const TextureAtlas& atlas, const Camera& cam,
                             const RegionParams& params) {
  RegionMasks m;
  m.width = buffers.width;
  m.height = buffers.height;
  m.factor = params.latent_factor;
  const std::size_t n = buffers.face_id.size();
  m.label.assign(n, Region::kBackground);
  m.view_cos.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    if (buffers.face_id[i] == kNoFace) continue;
    const double c = view_cosine(mesh, cam, buffers, i);
    m.view_cos[i] = c;
    if (c < params.grazing_cos) {
      m.label[i] = Region::kIgnore;
      continue;
    }
    const std::size_t t = uv_to_texel(pixel_uv(mesh, buffers, i), atlas.size);
    if (!atlas.painted[t]) {
      m.label[i] = Region::kNew;
    } else if (c - atlas.best_cos[t] >= params.update_margin) {
      m.label[i] = Region::kUpdate;
    } else {
      m.label[i] = Region::kKeep;
    }
  }
  m.latent_mask = to_latent_mask(m.label, m.width, m.height, m.factor);
  return m;
}

std::vector<std::uint8_t> to_latent_mask(const std::vector<Region>& labels, int width, int height,
                                         int factor) {
  if (factor <= 0 || width % factor != 0 || height % factor != 0) {
    throw ShapeError("image size " + std::to_string(width) + "x" + std::to_string(height) +
                     " is not divisible by latent factor " + std::to_string(factor));
  }
  if (labels.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("label map size does not match dimensions");
  }
  const int lw = width / factor;
  const int lh = height / factor;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(lw) * lh, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Region r = labels[static_cast<std::size_t>(y) * width + x];
      if (r == Region::kNew || r == Region::kIgnore) {
        mask[static_cast<std::size_t>(y / factor) * lw + x / factor] = 1;
      }
    }
  }
  return mask;
}

std::vector<Region> upsample_mask(const std::vector<std::uint8_t>& mask, int latent_width,
                                  int latent_height, int factor) {
  const int w = latent_width * factor;
  const int h = latent_height * factor;
  std::vector<Region> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool unknown = mask[static_cast<std::size_t>(y / factor) * latent_width + x / factor] != 0;
      out[static_cast<std::size_t>(y) * w + x] = unknown ? Region::kNew : Region::kKeep;
    }
  }
  return out;
}

Image label_image(const RegionMasks& masks) {
  Image img(masks.width, masks.height);
  for (std::size_t i = 0; i < masks.label.size(); ++i) {
    switch (masks.label[i]) {
      case Region::kBackground: img.pixels[i] = {0, 0, 0}; break;
      case Region::kKeep: img.pixels[i] = {40, 160, 60}; break;
      case Region::kNew: img.pixels[i] = {220, 60, 50}; break;
      case Region::kUpdate: img.pixels[i] = {60, 110, 220}; break;
      case Region::kIgnore: img.pixels[i] = {150, 150, 150}; break;
    }
  }
  return img;
}

}  // namespace textailor
