#include "textailor/latent.hpp"

#include <cmath>
#include <string>

#include "textailor/error.hpp"

namespace textailor {

bool LatentGrid::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.channels) + "x" +
                     std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                     std::to_string(b.channels) + "x" + std::to_string(b.height) + "x" +
                     std::to_string(b.width));
  }
}

LatentGrid gaussian_like(const LatentGrid& shape, std::mt19937_64& rng) {
  LatentGrid out(shape.channels, shape.height, shape.width);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.data) v = normal(rng);
  return out;
}

LatentGrid encode_image(const Image& image, int factor) {
  if (factor <= 0 || image.width % factor != 0 || image.height % factor != 0) {
    throw ShapeError("image not divisible by latent factor");
  }
  const int h = image.height / factor;
  const int w = image.width / factor;
  LatentGrid z(3, h, w);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          const Rgb8& p = image.at(x * factor + dx, y * factor + dy);
          for (int c = 0; c < 3; ++c) acc[c] += to_unit(p[c]);
        }
      }
      for (int c = 0; c < 3; ++c) z.at(c, y, x) = 2.0 * acc[c] * inv - 1.0;
    }
  }
  return z;
}

Image decode_latent(const LatentGrid& z, int factor) {
  if (z.channels != 3) throw ShapeError("decode_latent expects 3 channels");
  Image img(z.width * factor, z.height * factor);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      Rgb8& p = img.at(x, y);
      for (int c = 0; c < 3; ++c) p[c] = to_byte(0.5 * (z.at(c, y / factor, x / factor) + 1.0));
    }
  }
  return img;
}

}  // namespace textailor
