#include "lightcorners/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lightcorners/errors.hpp"
#include "lightcorners/network.hpp"

namespace lightcorners {
namespace {

void check_batch(std::span<const EvalExample> batch) {
  require(!batch.empty(), ErrorKind::InvalidInput, "metric needs at least one example");
  for (const auto& e : batch) {
    require(e.visible_count >= 1, ErrorKind::InvalidInput, "every example needs V_i >= 1");
  }
}

// (1/V_i) sum_j || p_ij M_ij - t_ij ||
double example_mean_residual(const EvalExample& e) {
  double sum = 0.0;
  for (int j = 0; j < kCorners; ++j) sum += corner_residual(e, j);
  return sum / e.visible_count;
}

}  // namespace

EvalExample make_eval_example(const CropSample& sample, const CornerPrediction& prediction) {
  return {prediction,         sample.targets,     sample.mask,       sample.visible_count,
          sample.light_box_w, sample.light_box_h, sample.crop_center};
}

double mask_weight(bool visible) noexcept { return visible ? 1.0 : kInvisibleCornerWeight; }

double corner_residual(const EvalExample& e, int j) noexcept {
  const double m = mask_weight(e.mask[j]);
  return std::hypot(e.prediction[2 * j] * m - e.targets[j].x, e.prediction[2 * j + 1] * m - e.targets[j].y);
}

double masked_corner_loss(std::span<const EvalExample> batch) {
  check_batch(batch);
  double total = 0.0;
  for (const auto& e : batch) total += example_mean_residual(e);
  return total / static_cast<double>(batch.size());
}

double average_distance_error(std::span<const EvalExample> batch, const CropSpec& spec) {
  check_batch(batch);
  const double h = spec.half_extent();
  double total = 0.0;
  for (const auto& e : batch) {
    double sum = 0.0;
    for (int j = 0; j < kCorners; ++j) sum += h * corner_residual(e, j);
    total += sum / e.visible_count;
  }
  return total / static_cast<double>(batch.size());
}

PercentError percent_error(std::span<const EvalExample> batch, const CropSpec& spec) {
  check_batch(batch);
  const double h = spec.half_extent();
  PercentError out;
  double total = 0.0;
  std::size_t included = 0;
  for (const auto& e : batch) {
    if (!(e.box_w > 0.0 && e.box_h > 0.0)) {
      ++out.excluded;
      continue;
    }
    const double diagonal = std::hypot(e.box_w, e.box_h);
    double sum = 0.0;
    for (int j = 0; j < kCorners; ++j) sum += corner_residual(e, j) * h / diagonal;
    total += sum / e.visible_count;
    ++included;
  }
  out.value = included == 0 ? std::numeric_limits<double>::quiet_NaN() : 100.0 * total / static_cast<double>(included);
  return out;
}

Box corner_box(const CornerSet& points) {
  Box box{INFINITY, INFINITY, -INFINITY, -INFINITY};
  int present = 0;
  for (const auto& p : points) {
    if (!p) continue;
    ++present;
    box.x_min = std::min(box.x_min, p->x);
    box.y_min = std::min(box.y_min, p->y);
    box.x_max = std::max(box.x_max, p->x);
    box.y_max = std::max(box.y_max, p->y);
  }
  require(present > 0, ErrorKind::InvalidInput, "corner box needs at least one point");
  return box;
}

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

std::pair<Box, Box> example_boxes(const EvalExample& e, const CropSpec& spec) {
  const auto predicted = denormalize_prediction(e.prediction, e.crop_center, spec);
  const auto truth = denormalize_prediction(targets_as_prediction(e.targets), e.crop_center, spec);
  CornerSet predicted_visible, truth_visible;
  for (int j = 0; j < kCorners; ++j) {
    if (!e.mask[j]) continue;
    predicted_visible[j] = predicted[j];
    truth_visible[j] = truth[j];
  }
  return {corner_box(predicted_visible), corner_box(truth_visible)};
}

std::map<double, double> detection_rate_from_ious(std::span<const double> ious, const std::vector<double>& thresholds) {
  require(!ious.empty(), ErrorKind::InvalidInput, "detection rate needs at least one light");
  std::map<double, double> rates;
  for (double threshold : thresholds) {
    const auto hits = std::count_if(ious.begin(), ious.end(), [threshold](double v) { return v > threshold; });
    rates[threshold] = static_cast<double>(hits) / static_cast<double>(ious.size());
  }
  return rates;
}

std::map<double, double> detection_rate(std::span<const EvalExample> batch, const CropSpec& spec,
                                        const std::vector<double>& thresholds) {
  check_batch(batch);
  std::vector<double> ious;
  ious.reserve(batch.size());
  for (const auto& e : batch) {
    const auto [predicted, truth] = example_boxes(e, spec);
    ious.push_back(iou(predicted, truth));
  }
  return detection_rate_from_ious(ious, thresholds);
}

LightMetrics evaluate_light(std::span<const EvalExample> batch, const CropSpec& spec) {
  return {masked_corner_loss(batch), average_distance_error(batch, spec), percent_error(batch, spec).value,
          batch.size()};
}

LightMetrics weighted_aggregate(const std::map<LightType, LightMetrics>& per_light) {
  std::size_t total = 0;
  for (const auto& [type, m] : per_light) total += m.n_test;
  require(total > 0, ErrorKind::InvalidInput, "weighted aggregate needs at least one light type with test samples");

  const auto combine = [&per_light](double LightMetrics::*field) {
    double sum = 0.0, weight = 0.0;
    for (const auto& [type, m] : per_light) {
      const double value = m.*field;
      if (m.n_test == 0 || std::isnan(value)) continue;
      sum += static_cast<double>(m.n_test) * value;
      weight += static_cast<double>(m.n_test);
    }
    return weight > 0.0 ? sum / weight : std::numeric_limits<double>::quiet_NaN();
  };
  return {combine(&LightMetrics::loss), combine(&LightMetrics::ade), combine(&LightMetrics::pct_error), total};
}

}  // namespace lightcorners
