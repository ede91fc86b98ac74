#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otkit/core.hpp"

namespace otkit {

// 8-bit RGB or RGBA raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;  // 3 = RGB, 4 = RGBA
  std::vector<std::uint8_t> pixels;

  static Image create(int width, int height, int channels);

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<size_t>(y) * width + x) * channels;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<size_t>(y) * width + x) * channels;
  }
};

// Non-interlaced 8-bit PNG, color types 2 (RGB) and 6 (RGBA). Alpha is
// carried through untouched by the rest of the pipeline.
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

}  // namespace otkit
