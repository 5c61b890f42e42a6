#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "lightcorners/geometry.hpp"

namespace lightcorners {

// One evaluated light: normalized prediction and targets plus the data the
// pixel-space metrics need.
struct EvalExample {
  CornerPrediction prediction{};
  std::array<Point, kCorners> targets{};  // normalized; (0, 0) where masked
  std::array<bool, kCorners> mask{};
  int visible_count = 0;
  double box_w = 0.0;  // visible ground-truth corner box, pixels
  double box_h = 0.0;
  Point crop_center;  // scene frame
};

EvalExample make_eval_example(const CropSample& sample, const CornerPrediction& prediction);

// Per-corner mask weight M_ij: 1 when visible, 1e-8 otherwise.
double mask_weight(bool visible) noexcept;

// || p_ij * M_ij - t_ij ||_2 in normalized units.
double corner_residual(const EvalExample& example, int corner) noexcept;

// (1/N) sum_i (1/V_i) sum_j || p_ij M_ij - t_ij ||
double masked_corner_loss(std::span<const EvalExample> batch);

// Mean over examples of (1/V_i) sum_j h || p_ij M_ij - t_ij ||, in pixels.
double average_distance_error(std::span<const EvalExample> batch, const CropSpec& spec);

struct PercentError {
  double value = 0.0;         // percent; NaN when every example was excluded
  std::size_t excluded = 0;   // examples with a degenerate light box
};

// 100 * mean over examples of (1/V_i) sum_j h || p_ij M_ij - t_ij || / sqrt(W_i^2 + H_i^2).
PercentError percent_error(std::span<const EvalExample> batch, const CropSpec& spec);

struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const noexcept { return (x_max - x_min) * (y_max - y_min); }
  bool operator==(const Box&) const = default;
};

// Axis-aligned box around the present points.
Box corner_box(const CornerSet& points);

// Intersection over union; 0 when disjoint. Zero-area boxes give 0 unless identical.
double iou(const Box& a, const Box& b) noexcept;

// Predicted and ground-truth corner boxes (visible slots, scene pixels) of one example.
std::pair<Box, Box> example_boxes(const EvalExample& example, const CropSpec& spec);

inline const std::vector<double> kDefaultIouThresholds = {0.25, 0.5};

// Fraction of lights whose predicted-corner box has IoU > threshold with the
// ground-truth box ("mAP@alpha").
std::map<double, double> detection_rate(std::span<const EvalExample> batch, const CropSpec& spec,
                                        const std::vector<double>& thresholds = kDefaultIouThresholds);

std::map<double, double> detection_rate_from_ious(std::span<const double> ious,
                                                  const std::vector<double>& thresholds = kDefaultIouThresholds);

struct LightMetrics {
  double loss = 0.0;
  double ade = 0.0;        // pixels
  double pct_error = 0.0;  // percent
  std::size_t n_test = 0;

  bool operator==(const LightMetrics&) const = default;
};

LightMetrics evaluate_light(std::span<const EvalExample> batch, const CropSpec& spec);

// Test-set-size weighted mean of each metric over the light types with
// n_test > 0. NaN metric values are left out of their own combination.
LightMetrics weighted_aggregate(const std::map<LightType, LightMetrics>& per_light);

}  // namespace lightcorners
