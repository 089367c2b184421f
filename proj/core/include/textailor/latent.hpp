#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "textailor/image.hpp"

namespace textailor {

/// C x H x W tensor, row-major within each channel plane.
struct LatentGrid {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  LatentGrid() = default;
  LatentGrid(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  double& at(int c, int y, int x) { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
  double at(int c, int y, int x) const { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }

  bool same_shape(const LatentGrid& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  bool all_finite() const;

  bool operator==(const LatentGrid&) const = default;
};

void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* what);

LatentGrid gaussian_like(const LatentGrid& shape, std::mt19937_64& rng);

/// Identity codec: the latent is the image box-downsampled by `factor`,
/// mapped from [0,1] to [-1,1] per RGB channel.
LatentGrid encode_image(const Image& image, int factor);

/// Nearest-neighbour upsample back to pixel resolution.
Image decode_latent(const LatentGrid& z, int factor);

}  // namespace textailor
