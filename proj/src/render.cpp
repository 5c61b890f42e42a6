#include "lightcorners/render.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace lightcorners {

namespace {

void plot(Image& image, int x, int y, Rgb color) {
  if (image.contains(x, y)) image.set(x, y, color.r, color.g, color.b);
}

void draw_polyline(Image& image, const std::vector<Point>& points, bool closed, Rgb color) {
  if (points.size() == 1) {
    draw_line(image, points[0], points[0], color);
    return;
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) draw_line(image, points[i], points[i + 1], color);
  if (closed && points.size() > 2) draw_line(image, points.back(), points.front(), color);
}

}  // namespace

void draw_line(Image& image, Point a, Point b, Rgb color) {
  int x0 = static_cast<int>(std::floor(a.x)), y0 = static_cast<int>(std::floor(a.y));
  const int x1 = static_cast<int>(std::floor(b.x)), y1 = static_cast<int>(std::floor(b.y));
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    plot(image, x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

Point local_center(const CropSample& sample) {
  const double h = sample.pixels.width / 2.0;
  const double offset_x = sample.crop_center.x - std::floor(sample.crop_center.x + 0.5);
  const double offset_y = sample.crop_center.y - std::floor(sample.crop_center.y + 0.5);
  return {h + (sample.mirrored ? -offset_x : offset_x), h + offset_y};
}

Image render_overlay(const CropSample& sample, const CornerPrediction& prediction) {
  Image out = sample.pixels;
  const double h = sample.pixels.width / 2.0;
  const Point center = local_center(sample);
  std::vector<Point> truth, predicted;
  for (int j = 0; j < kCorners; ++j) {
    if (!sample.mask[j]) continue;
    truth.push_back({center.x + h * sample.targets[j].x, center.y + h * sample.targets[j].y});
    predicted.push_back({center.x + h * prediction[2 * j], center.y + h * prediction[2 * j + 1]});
  }
  const bool closed = sample.visible_count == kCorners;
  draw_polyline(out, truth, closed, kTruthColor);
  draw_polyline(out, predicted, closed, kPredictionColor);
  const int cx = static_cast<int>(std::floor(center.x)), cy = static_cast<int>(std::floor(center.y));
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) plot(out, cx + dx, cy + dy, kCenterColor);
  }
  return out;
}

}  // namespace lightcorners
