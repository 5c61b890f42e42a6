#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lightcorners/metrics.hpp"

namespace lightcorners {

struct LightReport {
  LightMetrics metrics;
  std::map<double, double> detection;  // IoU threshold -> rate
  std::size_t pct_excluded = 0;
};

struct MetricSection {
  // A type with no test samples maps to nullopt ("n/a") and is left out of the weighted row.
  std::map<LightType, std::optional<LightReport>> per_light;
  LightMetrics weighted;
  std::map<double, double> detection;  // pooled over all lights
  std::size_t pct_excluded = 0;
};

struct MetricReport {
  std::string architecture;
  CropSpec crop;
  MetricSection clean;
  std::optional<MetricSection> noisy;  // frozen center noise
};

MetricSection score_section(const std::map<LightType, std::vector<EvalExample>>& examples, const CropSpec& spec,
                            const std::vector<double>& thresholds = kDefaultIouThresholds);

// Byte-stable JSON rendering (fixed key order, shortest round-trip numbers, NaN as null).
std::string report_json(const MetricReport& report);
// One `key=value` per line, e.g. `clean.FL.ade=3.21`.
std::string report_text(const MetricReport& report);
// Aligned human-readable table.
std::string report_table(const MetricReport& report);

}  // namespace lightcorners
