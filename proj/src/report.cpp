#include "lightcorners/report.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace lightcorners {

namespace {

std::string threshold_key(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t * 100.0);
  return std::string("map") + buf;
}

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::ordered_json detection_json(const std::map<double, double>& detection) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [t, rate] : detection) out[threshold_key(t)] = number(rate);
  return out;
}

nlohmann::ordered_json metrics_json(const LightMetrics& m) {
  nlohmann::ordered_json out;
  out["n_test"] = m.n_test;
  out["loss"] = number(m.loss);
  out["ade"] = number(m.ade);
  out["pct_error"] = number(m.pct_error);
  return out;
}

nlohmann::ordered_json section_json(const MetricSection& section) {
  nlohmann::ordered_json per_light = nlohmann::ordered_json::object();
  for (const auto& [type, light] : section.per_light) {
    if (!light) {
      per_light[std::string(short_name(type))] = nullptr;
      continue;
    }
    auto entry = metrics_json(light->metrics);
    entry["detection"] = detection_json(light->detection);
    entry["pct_excluded"] = light->pct_excluded;
    per_light[std::string(short_name(type))] = entry;
  }
  nlohmann::ordered_json out;
  out["per_light"] = per_light;
  out["weighted"] = metrics_json(section.weighted);
  out["detection"] = detection_json(section.detection);
  out["pct_excluded"] = section.pct_excluded;
  return out;
}

std::string format_value(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void section_text(std::string& out, const std::string& prefix, const MetricSection& section) {
  const auto line = [&out](const std::string& key, const std::string& value) { out += key + "=" + value + "\n"; };
  const auto metrics = [&line](const std::string& p, const LightMetrics& m) {
    line(p + ".n_test", std::to_string(m.n_test));
    line(p + ".loss", format_value(m.loss));
    line(p + ".ade", format_value(m.ade));
    line(p + ".pct_error", format_value(m.pct_error));
  };
  for (const auto& [type, light] : section.per_light) {
    const std::string p = prefix + "." + std::string(short_name(type));
    if (!light) {
      line(p, "n/a");
      continue;
    }
    metrics(p, light->metrics);
    for (const auto& [t, rate] : light->detection) line(p + "." + threshold_key(t), format_value(rate));
  }
  metrics(prefix + ".weighted", section.weighted);
  for (const auto& [t, rate] : section.detection) line(prefix + "." + threshold_key(t), format_value(rate));
  line(prefix + ".pct_excluded", std::to_string(section.pct_excluded));
}

void section_table(std::string& out, const std::string& title, const MetricSection& section) {
  char buf[160];
  out += title + "\n";
  std::string header = "  light   n_test      loss    ADE(px)   %Error";
  for (const auto& [t, rate] : section.detection) {
    std::snprintf(buf, sizeof buf, "  %8s", threshold_key(t).c_str());
    header += buf;
  }
  out += header + "\n";
  const auto row = [&](const std::string& name, const LightMetrics& m, const std::map<double, double>& detection) {
    std::snprintf(buf, sizeof buf, "  %-6s %7zu %9s %10s %8s", name.c_str(), m.n_test, format_value(m.loss).c_str(),
                  format_value(m.ade).c_str(), format_value(m.pct_error).c_str());
    out += buf;
    for (const auto& [t, rate] : detection) {
      std::snprintf(buf, sizeof buf, "  %8s", format_value(rate).c_str());
      out += buf;
    }
    out += "\n";
  };
  for (const auto& [type, light] : section.per_light) {
    if (!light) {
      std::snprintf(buf, sizeof buf, "  %-6s %7s\n", std::string(short_name(type)).c_str(), "n/a");
      out += buf;
      continue;
    }
    row(std::string(short_name(type)), light->metrics, light->detection);
  }
  row("all", section.weighted, section.detection);
  if (section.pct_excluded > 0) {
    out += "  " + std::to_string(section.pct_excluded) + " example(s) with a degenerate light box left out of %Error\n";
  }
}

}  // namespace

MetricSection score_section(const std::map<LightType, std::vector<EvalExample>>& examples, const CropSpec& spec,
                            const std::vector<double>& thresholds) {
  MetricSection section;
  std::vector<EvalExample> pooled;
  std::map<LightType, LightMetrics> metrics;
  for (LightType type : kLightTypes) {
    const auto it = examples.find(type);
    if (it == examples.end() || it->second.empty()) {
      section.per_light[type] = std::nullopt;
      continue;
    }
    LightReport light;
    light.metrics = evaluate_light(it->second, spec);
    light.detection = detection_rate(it->second, spec, thresholds);
    light.pct_excluded = percent_error(it->second, spec).excluded;
    section.pct_excluded += light.pct_excluded;
    metrics[type] = light.metrics;
    section.per_light[type] = light;
    pooled.insert(pooled.end(), it->second.begin(), it->second.end());
  }
  if (!pooled.empty()) {
    section.weighted = weighted_aggregate(metrics);
    section.detection = detection_rate(pooled, spec, thresholds);
  } else {
    section.weighted = {NAN, NAN, NAN, 0};
    for (double t : thresholds) section.detection[t] = NAN;
  }
  return section;
}

std::string report_json(const MetricReport& report) {
  nlohmann::ordered_json out;
  out["architecture"] = report.architecture;
  out["crop_size"] = report.crop.size;
  out["context"] = std::string(to_string(report.crop.mode));
  out["clean"] = section_json(report.clean);
  out["noisy"] = report.noisy ? section_json(*report.noisy) : nlohmann::ordered_json(nullptr);
  return out.dump(2) + "\n";
}

std::string report_text(const MetricReport& report) {
  std::string out;
  out += "architecture=" + report.architecture + "\n";
  out += "crop_size=" + std::to_string(report.crop.size) + "\n";
  out += "context=" + std::string(to_string(report.crop.mode)) + "\n";
  section_text(out, "clean", report.clean);
  if (report.noisy) section_text(out, "noisy", *report.noisy);
  return out;
}

std::string report_table(const MetricReport& report) {
  std::string out;
  section_table(out, "clean centers (" + std::string(to_string(report.crop.mode)) + " context)", report.clean);
  if (report.noisy) section_table(out, "noisy centers", *report.noisy);
  return out;
}

}  // namespace lightcorners
