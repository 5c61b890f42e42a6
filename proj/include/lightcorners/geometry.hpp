#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "lightcorners/image.hpp"

namespace lightcorners {

// Continuous 2D coordinate. The frame (scene pixels, crop pixels, or
// normalized offsets) is stated wherever a Point is used.
struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

bool is_finite(Point p) noexcept;

// Axis-aligned vehicle detection in the scene frame.
struct VehicleBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }

  // Closed-box membership of a continuous point.
  bool contains(Point p) const noexcept {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  // A pixel belongs to the box when its center (px + 0.5, py + 0.5) does.
  bool contains_pixel(int px, int py) const noexcept { return contains({px + 0.5, py + 0.5}); }
  Point clamp(Point p) const noexcept;

  bool operator==(const VehicleBox&) const = default;
};

enum class LightType { FrontLeft = 0, FrontRight = 1, RearLeft = 2, RearRight = 3 };

inline constexpr std::array<LightType, 4> kLightTypes = {LightType::FrontLeft, LightType::FrontRight,
                                                         LightType::RearLeft, LightType::RearRight};

std::string_view short_name(LightType type) noexcept;  // "FL", "FR", "RL", "RR"
LightType parse_light_type(std::string_view name);
LightType mirrored(LightType type) noexcept;           // FL<->FR, RL<->RR
inline int index_of(LightType type) noexcept { return static_cast<int>(type); }

// Corner slots, in the fixed order used by the 8-value regression head.
enum class Corner { TopLeft = 0, TopRight = 1, BottomRight = 2, BottomLeft = 3 };
inline constexpr int kCorners = 4;

// Ordered (TL, TR, BR, BL); an empty slot is an invisible corner.
using CornerSet = std::array<std::optional<Point>, kCorners>;

int count_visible(const CornerSet& corners) noexcept;

struct LightAnnotation {
  std::string image;
  VehicleBox vehicle;
  LightType light_type = LightType::FrontLeft;
  Point center;  // scene frame
  CornerSet corners;

  int visible_count() const noexcept { return count_visible(corners); }
  bool operator==(const LightAnnotation&) const = default;
};

// Checks the annotation invariants; image bounds are checked when both
// dimensions are positive. Throws Error(Validation).
void validate(const LightAnnotation& annotation, int image_width = 0, int image_height = 0);

enum class ContextMode { Scene, VehicleOnly };

std::string_view to_string(ContextMode mode) noexcept;  // "scene", "vehicle"
ContextMode parse_context_mode(std::string_view name);

struct CropSpec {
  int size = 128;
  ContextMode mode = ContextMode::VehicleOnly;

  // Normalization scale h = S / 2.
  double half_extent() const noexcept { return size / 2.0; }
  void validate() const;

  bool operator==(const CropSpec&) const = default;
};

// Column/row of the crop's first pixel in the scene frame. The window is
// [origin, origin + S) on each axis and is centered on the rounded center.
struct WindowOrigin {
  int x = 0;
  int y = 0;
};
WindowOrigin window_origin(Point center, const CropSpec& spec);

// S x S window of the scene around the rounded center; black outside the scene.
Image scene_context_crop(const Image& scene, Point center, const CropSpec& spec);

// Same window, but only pixels inside the vehicle box keep scene content.
Image vehicle_only_crop(const Image& scene, const VehicleBox& vehicle, Point center, const CropSpec& spec);

// Dispatches on spec.mode.
Image crop_for_mode(const Image& scene, const VehicleBox& vehicle, Point center, const CropSpec& spec);

struct NormalizedTargets {
  std::array<Point, kCorners> targets{};  // normalized offsets, (0, 0) where masked
  std::array<bool, kCorners> mask{};
  std::array<bool, kCorners> out_of_window{};  // clamping occurred
  int visible_count = 0;
  double box_width = 0.0;   // W of the visible ground-truth corner box, pixels
  double box_height = 0.0;  // H
};

NormalizedTargets normalize_targets(const LightAnnotation& annotation, Point crop_center, const CropSpec& spec);

// Eight values: (tx, ty) for TL, TR, BR, BL.
using CornerPrediction = std::array<double, 2 * kCorners>;

std::array<Point, kCorners> denormalize_prediction(const CornerPrediction& prediction, Point crop_center,
                                                   const CropSpec& spec);

// Model-ready sample.
struct CropSample {
  Image pixels;  // S x S
  std::array<Point, kCorners> targets{};
  std::array<bool, kCorners> mask{};
  std::array<bool, kCorners> out_of_window{};
  int visible_count = 0;
  LightType light_type = LightType::FrontLeft;
  Point crop_center;  // scene frame, after noise
  double light_box_w = 0.0;
  double light_box_h = 0.0;
  ContextMode mode = ContextMode::VehicleOnly;
  Point noise;            // center offset applied to produce crop_center
  bool mirrored = false;  // toggled by flip_horizontal

  bool operator==(const CropSample&) const = default;
};

// Builds a sample by cropping the scene around crop_center.
CropSample make_crop_sample(const Image& scene, const LightAnnotation& annotation, Point crop_center,
                            const CropSpec& spec);

// Mirrors pixel columns, negates target x, swaps TL<->TR and BR<->BL and
// maps the light type to its mirror. An involution.
CropSample flip_horizontal(const CropSample& sample);

CornerPrediction flip_prediction(const CornerPrediction& prediction) noexcept;

CornerPrediction targets_as_prediction(const std::array<Point, kCorners>& targets) noexcept;

}  // namespace lightcorners
