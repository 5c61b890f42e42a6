#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lightcorners {

// 8-bit interleaved RGB raster. Pixel (x, y) covers the continuous square
// [x, x+1) x [y, y+1) of its frame.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h);

  bool empty() const noexcept { return width == 0 || height == 0; }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }

  std::uint8_t* at(int x, int y) noexcept { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* at(int x, int y) const noexcept {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  // Intensity mapped to [0, 1].
  double intensity(int x, int y, int channel) const noexcept { return at(x, y)[channel] / 255.0; }

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    auto* p = at(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  bool operator==(const Image&) const = default;
};

// Reads binary PPM (P6, maxval 255) or PNG, chosen by file signature.
Image read_image(const std::filesystem::path& path);

// Writes PNG when the extension is .png, binary PPM otherwise.
void write_image(const std::filesystem::path& path, const Image& image);

Image mirror_columns(const Image& image);

}  // namespace lightcorners
