#include "lightcorners/annotations.hpp"

#include <fstream>
#include <sstream>

#include "lightcorners/errors.hpp"

namespace lightcorners {
namespace {

using nlohmann::json;

Point point_from_json(const json& value, const char* field) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
    fail(ErrorKind::Validation, std::string("'") + field + "' must be a [x, y] number pair");
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

const json& field(const json& record, const char* name) {
  const auto it = record.find(name);
  if (it == record.end()) fail(ErrorKind::Validation, std::string("missing field '") + name + "'");
  return *it;
}

}  // namespace

nlohmann::ordered_json to_json(const LightAnnotation& a) {
  nlohmann::ordered_json corners = nlohmann::ordered_json::array();
  for (const auto& c : a.corners) {
    corners.push_back(c ? nlohmann::ordered_json::array({c->x, c->y}) : nlohmann::ordered_json(nullptr));
  }
  nlohmann::ordered_json out;
  out["image"] = a.image;
  out["vehicle_box"] = {a.vehicle.x_min, a.vehicle.y_min, a.vehicle.x_max, a.vehicle.y_max};
  out["light_type"] = std::string(short_name(a.light_type));
  out["center"] = {a.center.x, a.center.y};
  out["corners"] = std::move(corners);
  return out;
}

LightAnnotation annotation_from_json(const json& record) {
  if (!record.is_object()) fail(ErrorKind::Validation, "record must be a JSON object");
  static const std::vector<std::string> kKnown = {"image", "vehicle_box", "light_type", "center", "corners"};
  for (const auto& [key, value] : record.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      fail(ErrorKind::Validation, "unknown field '" + key + "'");
    }
  }
  LightAnnotation a;
  const auto& image = field(record, "image");
  if (!image.is_string()) fail(ErrorKind::Validation, "'image' must be a string");
  a.image = image.get<std::string>();

  const auto& box = field(record, "vehicle_box");
  if (!box.is_array() || box.size() != 4) fail(ErrorKind::Validation, "'vehicle_box' must be [x1, y1, x2, y2]");
  for (const auto& v : box) {
    if (!v.is_number()) fail(ErrorKind::Validation, "'vehicle_box' entries must be numbers");
  }
  a.vehicle = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};

  const auto& type = field(record, "light_type");
  if (!type.is_string()) fail(ErrorKind::Validation, "'light_type' must be a string");
  a.light_type = parse_light_type(type.get<std::string>());

  a.center = point_from_json(field(record, "center"), "center");

  const auto& corners = field(record, "corners");
  if (!corners.is_array() || corners.size() != kCorners) {
    fail(ErrorKind::Validation, "'corners' must hold exactly four entries (point or null)");
  }
  for (int j = 0; j < kCorners; ++j) {
    if (!corners[j].is_null()) a.corners[j] = point_from_json(corners[j], "corners");
  }
  validate(a);
  return a;
}

std::string serialize_annotation(const LightAnnotation& annotation) { return to_json(annotation).dump(); }

std::string serialize_annotations(const std::vector<LightAnnotation>& annotations) {
  std::string out;
  for (const auto& a : annotations) {
    out += serialize_annotation(a);
    out += '\n';
  }
  return out;
}

std::vector<LightAnnotation> parse_annotations(std::istream& in, const std::string& source) {
  std::vector<LightAnnotation> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto record = json::parse(line);
      out.push_back(annotation_from_json(record));
    } catch (const json::exception& e) {
      fail(ErrorKind::Validation, source + ":" + std::to_string(number) + ": malformed JSON (" + e.what() + ")");
    } catch (const Error& e) {
      fail(ErrorKind::Validation, source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LightAnnotation> load_annotations(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open annotations " + path.string());
  auto annotations = parse_annotations(in, path.string());
  if (options.check_images) {
    for (std::size_t i = 0; i < annotations.size(); ++i) {
      const auto image = path.parent_path() / annotations[i].image;
      require(std::filesystem::exists(image), ErrorKind::Validation,
              path.string() + ": record " + std::to_string(i + 1) + " references missing image " + image.string());
    }
  }
  return annotations;
}

void save_annotations(const std::filesystem::path& path, const std::vector<LightAnnotation>& annotations) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << serialize_annotations(annotations);
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace lightcorners
