#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace textailor {

using Rgb8 = std::array<std::uint8_t, 3>;

/// Row-major 8-bit RGB image; row 0 is the top scanline.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb8> pixels;

  Image() = default;
  Image(int w, int h, Rgb8 fill = {0, 0, 0})
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Rgb8& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb8& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const Image&) const = default;
};

std::uint8_t to_byte(double unit_value);
double to_unit(std::uint8_t byte);

void write_png(const std::filesystem::path& path, const Image& image);

/// Writes RGBA; `alpha` must have width*height entries.
void write_png_rgba(const std::filesystem::path& path, const Image& image,
                    const std::vector<std::uint8_t>& alpha);

struct RgbaImage {
  Image rgb;
  std::vector<std::uint8_t> alpha;
};

/// Reads any 8-bit PNG; alpha is 255 everywhere when the file has none.
RgbaImage read_png(const std::filesystem::path& path);

}  // namespace textailor
