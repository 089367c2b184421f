#include "textailor/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "textailor/error.hpp"

namespace textailor {

std::uint8_t to_byte(double unit_value) {
  const double v = std::clamp(unit_value, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

double to_unit(std::uint8_t byte) { return static_cast<double>(byte) / 255.0; }

namespace {

// libpng reports errors through longjmp; every function below keeps only
// trivially destructible locals between setjmp and the libpng calls.
void write_rows(const std::filesystem::path& path, int width, int height, int color_type,
                const std::vector<std::uint8_t>& bytes, int channels) {
  std::FILE* file = std::fopen(path.string().c_str(), "wb");
  if (!file) throw Error("cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(file);
    throw Error("png: failed writing " + path.string());
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + stride * y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(file);
}

// Decodes into `bytes` as RGBA8; returns false on any libpng error.
bool read_rgba(std::FILE* file, int* width, int* height, std::vector<std::uint8_t>* bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  *width = static_cast<int>(png_get_image_width(png, info));
  *height = static_cast<int>(png_get_image_height(png, info));
  const int color_type = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  const bool has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  if (has_trns) png_set_tRNS_to_alpha(png);
  if (!(color_type & PNG_COLOR_MASK_ALPHA) && !has_trns) png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  // resize() may throw; do it before any further libpng call can longjmp past it.
  bytes->resize(static_cast<std::size_t>(*width) * *height * 4);
  for (int y = 0; y < *height; ++y) {
    png_read_row(png, bytes->data() + static_cast<std::size_t>(y) * *width * 4, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.pixels.size() * 3);
  for (const auto& p : image.pixels) bytes.insert(bytes.end(), p.begin(), p.end());
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_RGB, bytes, 3);
}

void write_png_rgba(const std::filesystem::path& path, const Image& image,
                    const std::vector<std::uint8_t>& alpha) {
  if (alpha.size() != image.pixels.size()) throw ShapeError("alpha size does not match image");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.pixels.size() * 4);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    bytes.insert(bytes.end(), image.pixels[i].begin(), image.pixels[i].end());
    bytes.push_back(alpha[i]);
  }
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_RGBA, bytes, 4);
}

RgbaImage read_png(const std::filesystem::path& path) {
  std::FILE* file = std::fopen(path.string().c_str(), "rb");
  if (!file) throw Error("cannot open " + path.string());
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bytes;
  const bool ok = read_rgba(file, &width, &height, &bytes);
  std::fclose(file);
  if (!ok) throw Error("png: failed reading " + path.string());

  RgbaImage out;
  out.rgb = Image(width, height);
  out.alpha.resize(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < out.alpha.size(); ++i) {
    out.rgb.pixels[i] = {bytes[4 * i], bytes[4 * i + 1], bytes[4 * i + 2]};
    out.alpha[i] = bytes[4 * i + 3];
  }
  return out;
}

}  // namespace textailor
