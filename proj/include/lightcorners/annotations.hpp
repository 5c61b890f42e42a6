#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightcorners/geometry.hpp"

namespace lightcorners {

// One light per line:
//   {"image": str, "vehicle_box": [x1, y1, x2, y2], "light_type": "FL|FR|RL|RR",
//    "center": [x, y], "corners": [[x, y] | null, x4 in TL, TR, BR, BL order]}
nlohmann::ordered_json to_json(const LightAnnotation& annotation);
LightAnnotation annotation_from_json(const nlohmann::json& record);

std::string serialize_annotation(const LightAnnotation& annotation);  // single line, no newline
std::string serialize_annotations(const std::vector<LightAnnotation>& annotations);

// Parses and validates JSON-Lines text. Blank lines are skipped; every
// rejection names its 1-based line number.
std::vector<LightAnnotation> parse_annotations(std::istream& in, const std::string& source = "<stream>");

struct LoadOptions {
  // Resolve `image` relative to the annotation file and require it to exist.
  bool check_images = false;
};

std::vector<LightAnnotation> load_annotations(const std::filesystem::path& path, const LoadOptions& options = {});
void save_annotations(const std::filesystem::path& path, const std::vector<LightAnnotation>& annotations);

}  // namespace lightcorners
