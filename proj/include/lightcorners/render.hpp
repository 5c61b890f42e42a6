#pragma once

#include "lightcorners/geometry.hpp"
#include "lightcorners/image.hpp"

namespace lightcorners {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

inline constexpr Rgb kCenterColor{0, 0, 255};
inline constexpr Rgb kTruthColor{0, 255, 0};
inline constexpr Rgb kPredictionColor{255, 0, 0};

// Bresenham line between the pixels containing a and b, clipped to the image.
void draw_line(Image& image, Point a, Point b, Rgb color);

// Crop-frame position of the crop center (accounts for rounding and mirroring).
Point local_center(const CropSample& sample);

// Copy of the crop with the center (blue), ground-truth corners (green) and
// predicted corners (red) drawn as polylines through the visible slots in
// TL, TR, BR, BL order, closed when all four are visible.
Image render_overlay(const CropSample& sample, const CornerPrediction& prediction);

}  // namespace lightcorners
