#include "lightcorners/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "lightcorners/errors.hpp"

namespace lightcorners {
namespace {

using FilePtr = std::unique_ptr<std::FILE, decltype(&std::fclose)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr file(std::fopen(path.c_str(), mode), &std::fclose);
  if (!file) fail(ErrorKind::Io, "cannot open " + path.string());
  return file;
}

// Reads the next whitespace/comment separated header token of a PPM file.
int read_ppm_number(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (!in || !std::isdigit(c)) fail(ErrorKind::Io, "malformed PPM header in " + path.string());
  int value = 0;
  while (in && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > (1 << 24)) fail(ErrorKind::Io, "PPM dimension too large in " + path.string());
    c = in.get();
  }
  return value;
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6') fail(ErrorKind::Io, "not a binary PPM: " + path.string());
  const int width = read_ppm_number(in, path);
  const int height = read_ppm_number(in, path);
  const int maxval = read_ppm_number(in, path);
  if (maxval != 255) fail(ErrorKind::Io, "only 8-bit PPM is supported: " + path.string());
  if (width <= 0 || height <= 0) fail(ErrorKind::Io, "empty PPM image: " + path.string());
  Image image(width, height);
  in.read(reinterpret_cast<char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.rgb.size())) {
    fail(ErrorKind::Io, "truncated PPM pixel data: " + path.string());
  }
  return image;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&info, path.c_str())) {
    fail(ErrorKind::Io, "cannot decode PNG " + path.string() + ": " + info.message);
  }
  info.format = PNG_FORMAT_RGB;
  Image image(static_cast<int>(info.width), static_cast<int>(info.height));
  if (!png_image_finish_read(&info, nullptr, image.rgb.data(), 0, nullptr)) {
    std::string message = info.message;
    png_image_free(&info);
    fail(ErrorKind::Io, "cannot decode PNG " + path.string() + ": " + message);
  }
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(image.width);
  info.height = static_cast<png_uint_32>(image.height);
  info.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&info, path.c_str(), 0, image.rgb.data(), 0, nullptr)) {
    fail(ErrorKind::Io, "cannot encode PNG " + path.string() + ": " + info.message);
  }
}

}  // namespace

Image::Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

Image read_image(const std::filesystem::path& path) {
  std::array<unsigned char, 8> signature{};
  {
    auto file = open_file(path, "rb");
    if (std::fread(signature.data(), 1, signature.size(), file.get()) < 2) {
      fail(ErrorKind::Io, "file too short to be an image: " + path.string());
    }
  }
  if (signature[0] == 'P' && signature[1] == '6') return read_ppm(path);
  if (png_sig_cmp(signature.data(), 0, signature.size()) == 0) return read_png(path);
  fail(ErrorKind::Io, "unsupported image format: " + path.string());
}

void write_image(const std::filesystem::path& path, const Image& image) {
  if (image.empty()) fail(ErrorKind::InvalidInput, "refusing to write an empty image to " + path.string());
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    write_png(path, image);
  } else {
    write_ppm(path, image);
  }
}

Image mirror_columns(const Image& image) {
  Image out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto* src = image.at(image.width - 1 - x, y);
      std::copy(src, src + 3, out.at(x, y));
    }
  }
  return out;
}

}  // namespace lightcorners
