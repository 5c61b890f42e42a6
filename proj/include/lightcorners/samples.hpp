#pragma once

#include <span>
#include <vector>

#include "lightcorners/geometry.hpp"
#include "lightcorners/image.hpp"

namespace lightcorners {

// Scene pixels around one light, already restricted to the vehicle box in
// vehicle-only mode. Any crop whose center rounds to within `margin` pixels
// of the annotated center can be cut from it without the full scene.
struct LightExample {
  LightAnnotation annotation;
  CropSpec spec;
  int margin = 0;
  int scene_width = 0;
  int scene_height = 0;
  WindowOrigin origin;  // scene position of patch pixel (0, 0)
  Image patch;          // (S + 2 margin) square

  // Identical to make_crop_sample(scene, annotation, crop_center, spec).
  CropSample crop(Point crop_center) const;
  CropSample crop() const { return crop(annotation.center); }
};

LightExample make_example(const Image& scene, const LightAnnotation& annotation, const CropSpec& spec, int margin = 0);

// Margin that covers every center produced by noise clipped at `clip` px.
int margin_for_clip(double clip) noexcept;

}  // namespace lightcorners
