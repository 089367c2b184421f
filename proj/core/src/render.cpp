#include "textailor/render.hpp"

namespace textailor {

Image render_textured(const Mesh& mesh, const TextureAtlas& atlas, const Camera& cam, Rgb8 bg) {
  return render_textured(mesh, atlas, cam, rasterize(mesh, cam), bg);
}

Image render_textured(const Mesh& mesh, const TextureAtlas& atlas, const Camera&,
                      const RasterBuffers& buffers, Rgb8 bg) {
  Image img(buffers.width, buffers.height, bg);
  for (std::size_t i = 0; i < buffers.face_id.size(); ++i) {
    if (buffers.face_id[i] == kNoFace) continue;
    const std::size_t t = uv_to_texel(pixel_uv(mesh, buffers, i), atlas.size);
    img.pixels[i] = atlas.painted[t] ? atlas.texels[t] : kUnpaintedColor;
  }
  return img;
}

}  // namespace textailor
