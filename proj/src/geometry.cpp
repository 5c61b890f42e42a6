#include "lightcorners/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lightcorners/errors.hpp"

namespace lightcorners {
namespace {

std::string describe(Point p) {
  std::ostringstream out;
  out << '(' << p.x << ", " << p.y << ')';
  return out.str();
}

// Copies the S x S window at `origin`; pixels rejected by `keep` stay black.
template <typename Keep>
Image extract_window(const Image& scene, WindowOrigin origin, int size, Keep keep) {
  Image out(size, size);
  for (int row = 0; row < size; ++row) {
    const int sy = origin.y + row;
    if (sy < 0 || sy >= scene.height) continue;
    for (int col = 0; col < size; ++col) {
      const int sx = origin.x + col;
      if (sx < 0 || sx >= scene.width || !keep(sx, sy)) continue;
      const auto* src = scene.at(sx, sy);
      std::copy(src, src + 3, out.at(col, row));
    }
  }
  return out;
}

constexpr std::array<int, kCorners> kMirroredCorner = {1, 0, 3, 2};

}  // namespace

bool is_finite(Point p) noexcept { return std::isfinite(p.x) && std::isfinite(p.y); }

Point VehicleBox::clamp(Point p) const noexcept {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

std::string_view short_name(LightType type) noexcept {
  switch (type) {
    case LightType::FrontLeft: return "FL";
    case LightType::FrontRight: return "FR";
    case LightType::RearLeft: return "RL";
    case LightType::RearRight: return "RR";
  }
  return "??";
}

LightType parse_light_type(std::string_view name) {
  for (auto type : kLightTypes) {
    if (short_name(type) == name) return type;
  }
  fail(ErrorKind::Validation, "unknown light type '" + std::string(name) + "' (expected FL, FR, RL or RR)");
}

LightType mirrored(LightType type) noexcept {
  switch (type) {
    case LightType::FrontLeft: return LightType::FrontRight;
    case LightType::FrontRight: return LightType::FrontLeft;
    case LightType::RearLeft: return LightType::RearRight;
    case LightType::RearRight: return LightType::RearLeft;
  }
  return type;
}

int count_visible(const CornerSet& corners) noexcept {
  return static_cast<int>(std::count_if(corners.begin(), corners.end(), [](const auto& c) { return c.has_value(); }));
}

void validate(const LightAnnotation& a, int image_width, int image_height) {
  const auto& box = a.vehicle;
  require(std::isfinite(box.x_min) && std::isfinite(box.y_min) && std::isfinite(box.x_max) &&
              std::isfinite(box.y_max),
          ErrorKind::Validation, "vehicle box has non-finite coordinates");
  require(box.x_min < box.x_max && box.y_min < box.y_max, ErrorKind::Validation,
          "vehicle box must satisfy x_min < x_max and y_min < y_max");
  require(is_finite(a.center), ErrorKind::Validation, "center has non-finite coordinates");
  require(box.contains(a.center), ErrorKind::Validation, "center " + describe(a.center) + " lies outside the vehicle box");
  require(a.visible_count() >= 1, ErrorKind::Validation, "light has no visible corners");
  const bool check_image = image_width > 0 && image_height > 0;
  if (check_image) {
    require(box.x_min >= 0 && box.y_min >= 0 && box.x_max <= image_width && box.y_max <= image_height,
            ErrorKind::Validation, "vehicle box exceeds the scene image");
  }
  for (const auto& corner : a.corners) {
    if (!corner) continue;
    require(is_finite(*corner), ErrorKind::Validation, "corner has non-finite coordinates");
    if (check_image) {
      require(corner->x >= 0 && corner->y >= 0 && corner->x <= image_width && corner->y <= image_height,
              ErrorKind::Validation, "corner " + describe(*corner) + " lies outside the scene image");
    }
  }
}

std::string_view to_string(ContextMode mode) noexcept {
  return mode == ContextMode::Scene ? "scene" : "vehicle";
}

ContextMode parse_context_mode(std::string_view name) {
  if (name == "scene") return ContextMode::Scene;
  if (name == "vehicle") return ContextMode::VehicleOnly;
  fail(ErrorKind::Config, "unknown context mode '" + std::string(name) + "' (expected scene or vehicle)");
}

void CropSpec::validate() const {
  require(size > 0 && size % 2 == 0, ErrorKind::Config, "crop size must be even and positive");
}

WindowOrigin window_origin(Point center, const CropSpec& spec) {
  const int half = spec.size / 2;
  return {static_cast<int>(std::floor(center.x + 0.5)) - half, static_cast<int>(std::floor(center.y + 0.5)) - half};
}

Image scene_context_crop(const Image& scene, Point center, const CropSpec& spec) {
  spec.validate();
  require(spec.mode == ContextMode::Scene, ErrorKind::InvalidInput, "scene_context_crop needs a scene-context spec");
  require(is_finite(center) && center.x >= 0 && center.y >= 0 && center.x <= scene.width && center.y <= scene.height,
          ErrorKind::InvalidInput, "crop center " + describe(center) + " outside the scene image");
  return extract_window(scene, window_origin(center, spec), spec.size, [](int, int) { return true; });
}

Image vehicle_only_crop(const Image& scene, const VehicleBox& vehicle, Point center, const CropSpec& spec) {
  spec.validate();
  require(spec.mode == ContextMode::VehicleOnly, ErrorKind::InvalidInput,
          "vehicle_only_crop needs a vehicle-only spec");
  require(is_finite(center) && vehicle.contains(center), ErrorKind::InvalidInput,
          "crop center " + describe(center) + " outside the vehicle box");
  return extract_window(scene, window_origin(center, spec), spec.size,
                        [&vehicle](int x, int y) { return vehicle.contains_pixel(x, y); });
}

Image crop_for_mode(const Image& scene, const VehicleBox& vehicle, Point center, const CropSpec& spec) {
  return spec.mode == ContextMode::Scene ? scene_context_crop(scene, center, spec)
                                         : vehicle_only_crop(scene, vehicle, center, spec);
}

NormalizedTargets normalize_targets(const LightAnnotation& annotation, Point crop_center, const CropSpec& spec) {
  require(is_finite(crop_center), ErrorKind::InvalidInput, "crop center must be finite");
  NormalizedTargets out;
  out.visible_count = annotation.visible_count();
  require(out.visible_count >= 1, ErrorKind::InvalidInput, "annotation has zero visible corners");
  const double h = spec.half_extent();
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (int j = 0; j < kCorners; ++j) {
    const auto& corner = annotation.corners[j];
    if (!corner) continue;
    const double tx = (corner->x - crop_center.x) / h;
    const double ty = (corner->y - crop_center.y) / h;
    out.targets[j] = {std::clamp(tx, -1.0, 1.0), std::clamp(ty, -1.0, 1.0)};
    out.out_of_window[j] = out.targets[j].x != tx || out.targets[j].y != ty;
    out.mask[j] = true;
    x_lo = std::min(x_lo, corner->x);
    x_hi = std::max(x_hi, corner->x);
    y_lo = std::min(y_lo, corner->y);
    y_hi = std::max(y_hi, corner->y);
  }
  out.box_width = x_hi - x_lo;
  out.box_height = y_hi - y_lo;
  return out;
}

std::array<Point, kCorners> denormalize_prediction(const CornerPrediction& prediction, Point crop_center,
                                                   const CropSpec& spec) {
  const double h = spec.half_extent();
  std::array<Point, kCorners> out{};
  for (int j = 0; j < kCorners; ++j) {
    out[j] = {crop_center.x + h * prediction[2 * j], crop_center.y + h * prediction[2 * j + 1]};
  }
  return out;
}

CropSample make_crop_sample(const Image& scene, const LightAnnotation& annotation, Point crop_center,
                            const CropSpec& spec) {
  const auto normalized = normalize_targets(annotation, crop_center, spec);
  CropSample sample;
  sample.pixels = crop_for_mode(scene, annotation.vehicle, crop_center, spec);
  sample.targets = normalized.targets;
  sample.mask = normalized.mask;
  sample.out_of_window = normalized.out_of_window;
  sample.visible_count = normalized.visible_count;
  sample.light_type = annotation.light_type;
  sample.crop_center = crop_center;
  sample.light_box_w = normalized.box_width;
  sample.light_box_h = normalized.box_height;
  sample.mode = spec.mode;
  sample.noise = {crop_center.x - annotation.center.x, crop_center.y - annotation.center.y};
  return sample;
}

CropSample flip_horizontal(const CropSample& sample) {
  CropSample out = sample;
  out.pixels = mirror_columns(sample.pixels);
  for (int j = 0; j < kCorners; ++j) {
    const int src = kMirroredCorner[j];
    out.targets[j] = sample.mask[src] ? Point{-sample.targets[src].x, sample.targets[src].y} : Point{};
    out.mask[j] = sample.mask[src];
    out.out_of_window[j] = sample.out_of_window[src];
  }
  out.light_type = mirrored(sample.light_type);
  out.mirrored = !sample.mirrored;
  return out;
}

CornerPrediction flip_prediction(const CornerPrediction& prediction) noexcept {
  CornerPrediction out{};
  for (int j = 0; j < kCorners; ++j) {
    const int src = kMirroredCorner[j];
    out[2 * j] = -prediction[2 * src];
    out[2 * j + 1] = prediction[2 * src + 1];
  }
  return out;
}

CornerPrediction targets_as_prediction(const std::array<Point, kCorners>& targets) noexcept {
  CornerPrediction out{};
  for (int j = 0; j < kCorners; ++j) {
    out[2 * j] = targets[j].x;
    out[2 * j + 1] = targets[j].y;
  }
  return out;
}

}  // namespace lightcorners
