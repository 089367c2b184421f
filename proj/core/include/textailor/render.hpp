#pragma once

#include "textailor/atlas.hpp"
#include "textailor/camera.hpp"
#include "textailor/image.hpp"
#include "textailor/mesh.hpp"
#include "textailor/raster.hpp"

namespace textailor {

/// Albedo-only render with nearest-texel lookup. Unpainted texels come out in
/// kUnpaintedColor, background pixels in `bg`.
Image render_textured(const Mesh& mesh, const TextureAtlas& atlas, const Camera& cam, Rgb8 bg);
Image render_textured(const Mesh& mesh, const TextureAtlas& atlas, const Camera& cam,
                      const RasterBuffers& buffers, Rgb8 bg);

}  // namespace textailor
