#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lightcorners/geometry.hpp"
#include "lightcorners/image.hpp"

namespace lightcorners {

// Procedural traffic-scene generator with exact corner ground truth.
struct SynthConfig {
  int width = 640;
  int height = 480;
  int n_scenes = 100;
  int vehicles_min = 1;  // each vehicle shows one light pair (front or rear)
  int vehicles_max = 3;
  double light_min = 16.0;  // light extent range, pixels
  double light_max = 40.0;
  double irregularity = 0.3;  // 0: axis-aligned rectangles
  double occlusion = 0.15;    // per-corner occlusion probability q
  double clutter = 0.5;       // background clutter level in [0, 1]
  double front_right_keep = 1.0;  // fraction of FR lights annotated (imbalance knob)
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

struct SynthScene {
  std::string image_name;  // relative path, "images/scene_00000.ppm"
  Image image;
  std::vector<LightAnnotation> lights;
};

std::string scene_image_name(std::size_t index);

// Deterministic in (cfg, index); scenes can be generated in any order.
SynthScene generate_scene(const SynthConfig& cfg, std::size_t index);

void for_each_synthetic_scene(const SynthConfig& cfg, const std::function<void(SynthScene&&)>& visit);

struct SynthDataset {
  std::vector<std::string> image_names;
  std::vector<Image> images;
  std::vector<LightAnnotation> annotations;
};

SynthDataset generate_synthetic(const SynthConfig& cfg);

// Pixels painted by the light quadrilateral fill rule: a pixel is inside when
// its center lies in the closed polygon. Exposed for ground-truth checks.
bool quad_covers_pixel(const std::array<Point, kCorners>& quad, int px, int py) noexcept;

}  // namespace lightcorners
