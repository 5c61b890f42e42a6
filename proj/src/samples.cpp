#include "lightcorners/samples.hpp"

#include <algorithm>
#include <cmath>

#include "lightcorners/errors.hpp"

namespace lightcorners {

LightExample make_example(const Image& scene, const LightAnnotation& annotation, const CropSpec& spec, int margin) {
  spec.validate();
  require(margin >= 0, ErrorKind::InvalidInput, "patch margin must be >= 0");
  LightExample example;
  example.annotation = annotation;
  example.spec = spec;
  example.margin = margin;
  example.scene_width = scene.width;
  example.scene_height = scene.height;
  const WindowOrigin center_origin = window_origin(annotation.center, spec);
  example.origin = {center_origin.x - margin, center_origin.y - margin};
  const int side = spec.size + 2 * margin;
  example.patch = Image(side, side);
  const bool restrict = spec.mode == ContextMode::VehicleOnly;
  for (int row = 0; row < side; ++row) {
    const int sy = example.origin.y + row;
    if (sy < 0 || sy >= scene.height) continue;
    for (int col = 0; col < side; ++col) {
      const int sx = example.origin.x + col;
      if (sx < 0 || sx >= scene.width) continue;
      if (restrict && !annotation.vehicle.contains_pixel(sx, sy)) continue;
      const auto* src = scene.at(sx, sy);
      std::copy(src, src + 3, example.patch.at(col, row));
    }
  }
  return example;
}

CropSample LightExample::crop(Point crop_center) const {
  require(is_finite(crop_center), ErrorKind::InvalidInput, "crop center must be finite");
  if (spec.mode == ContextMode::VehicleOnly) {
    require(annotation.vehicle.contains(crop_center), ErrorKind::InvalidInput, "crop center outside the vehicle box");
  } else {
    require(crop_center.x >= 0 && crop_center.y >= 0 && crop_center.x <= scene_width && crop_center.y <= scene_height,
            ErrorKind::InvalidInput, "crop center outside the scene image");
  }
  const WindowOrigin window = window_origin(crop_center, spec);
  const int dx = window.x - origin.x;
  const int dy = window.y - origin.y;
  require(dx >= 0 && dy >= 0 && dx <= 2 * margin && dy <= 2 * margin, ErrorKind::InvalidInput,
          "crop center moved further than the cached patch margin of " + std::to_string(margin) + " px");

  const auto normalized = normalize_targets(annotation, crop_center, spec);
  CropSample sample;
  sample.pixels = Image(spec.size, spec.size);
  for (int row = 0; row < spec.size; ++row) {
    const auto* src = patch.at(dx, dy + row);
    std::copy(src, src + 3 * spec.size, sample.pixels.at(0, row));
  }
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

int margin_for_clip(double clip) noexcept { return static_cast<int>(std::ceil(clip)) + 1; }

}  // namespace lightcorners
