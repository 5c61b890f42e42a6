#include "lightcorners/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include "lightcorners/errors.hpp"
#include "lightcorners/network.hpp"

namespace lightcorners {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  require(res.ec == std::errc() && res.ptr == end, ErrorKind::Config,
          "invalid value '" + text + "' for " + key);
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  fail(ErrorKind::Config, "invalid value '" + text + "' for " + key + " (expected true or false)");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
  return out;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <typename T, typename Access>
Field number_field(std::string key, Access access) {
  return {key,
          [access](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(access(const_cast<ExperimentConfig&>(c)));
            } else {
              return std::to_string(access(const_cast<ExperimentConfig&>(c)));
            }
          },
          [access, key](ExperimentConfig& c, const std::string& v) { access(c) = parse_number<T>(key, v); }};
}

template <typename Access>
Field bool_field(std::string key, Access access) {
  return {key,
          [access](const ExperimentConfig& c) {
            return std::string(access(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          },
          [access, key](ExperimentConfig& c, const std::string& v) { access(c) = parse_bool(key, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"data.dir", [](const ExperimentConfig& c) { return c.data_dir.string(); },
                 [](ExperimentConfig& c, const std::string& v) { c.data_dir = v; }});
    f.push_back({"output.dir", [](const ExperimentConfig& c) { return c.output_dir.string(); },
                 [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }});
    f.push_back({"model.architecture", [](const ExperimentConfig& c) { return c.architecture; },
                 [](ExperimentConfig& c, const std::string& v) { c.architecture = v; }});
    f.push_back(number_field<int>("crop.size", [](ExperimentConfig& c) -> int& { return c.crop.size; }));
    f.push_back({"crop.context", [](const ExperimentConfig& c) { return std::string(to_string(c.crop.mode)); },
                 [](ExperimentConfig& c, const std::string& v) { c.crop.mode = parse_context_mode(v); }});
    f.push_back(number_field<double>("noise.p_zero", [](ExperimentConfig& c) -> double& { return c.noise.p_zero; }));
    f.push_back(number_field<double>("noise.sigma", [](ExperimentConfig& c) -> double& { return c.noise.sigma; }));
    f.push_back(number_field<double>("noise.clip", [](ExperimentConfig& c) -> double& { return c.noise.clip; }));
    f.push_back(
        number_field<std::uint64_t>("noise.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.noise.seed; }));
    f.push_back(number_field<double>("train.lr", [](ExperimentConfig& c) -> double& { return c.train.lr; }));
    f.push_back(number_field<double>("train.weight_decay",
                                     [](ExperimentConfig& c) -> double& { return c.train.weight_decay; }));
    f.push_back(number_field<int>("train.epochs", [](ExperimentConfig& c) -> int& { return c.train.epochs; }));
    f.push_back(number_field<int>("train.batch_size", [](ExperimentConfig& c) -> int& { return c.train.batch_size; }));
    f.push_back(number_field<int>("train.swa_start_epoch",
                                  [](ExperimentConfig& c) -> int& { return c.train.swa_start_epoch; }));
    f.push_back(number_field<double>("train.swa_lr_decay",
                                     [](ExperimentConfig& c) -> double& { return c.train.swa_lr_decay; }));
    f.push_back(
        number_field<std::uint64_t>("train.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.train.seed; }));
    f.push_back(bool_field("train.augment", [](ExperimentConfig& c) -> bool& { return c.train.augment; }));
    f.push_back({"train.flip_routing",
                 [](const ExperimentConfig& c) { return std::string(to_string(c.train.flip_routing)); },
                 [](ExperimentConfig& c, const std::string& v) { c.train.flip_routing = parse_flip_routing(v); }});
    f.push_back(bool_field("train.noise", [](ExperimentConfig& c) -> bool& { return c.train_noise; }));
    f.push_back(
        number_field<std::uint64_t>("split.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.split.seed; }));
    f.push_back(number_field<double>("split.train_fraction",
                                     [](ExperimentConfig& c) -> double& { return c.split.train_fraction; }));
    f.push_back(number_field<int>("synth.width", [](ExperimentConfig& c) -> int& { return c.synth.width; }));
    f.push_back(number_field<int>("synth.height", [](ExperimentConfig& c) -> int& { return c.synth.height; }));
    f.push_back(number_field<int>("synth.scenes", [](ExperimentConfig& c) -> int& { return c.synth.n_scenes; }));
    f.push_back(
        number_field<int>("synth.vehicles_min", [](ExperimentConfig& c) -> int& { return c.synth.vehicles_min; }));
    f.push_back(
        number_field<int>("synth.vehicles_max", [](ExperimentConfig& c) -> int& { return c.synth.vehicles_max; }));
    f.push_back(
        number_field<double>("synth.light_min", [](ExperimentConfig& c) -> double& { return c.synth.light_min; }));
    f.push_back(
        number_field<double>("synth.light_max", [](ExperimentConfig& c) -> double& { return c.synth.light_max; }));
    f.push_back(number_field<double>("synth.irregularity",
                                     [](ExperimentConfig& c) -> double& { return c.synth.irregularity; }));
    f.push_back(
        number_field<double>("synth.occlusion", [](ExperimentConfig& c) -> double& { return c.synth.occlusion; }));
    f.push_back(number_field<double>("synth.clutter", [](ExperimentConfig& c) -> double& { return c.synth.clutter; }));
    f.push_back(number_field<double>("synth.front_right_keep",
                                     [](ExperimentConfig& c) -> double& { return c.synth.front_right_keep; }));
    f.push_back(
        number_field<std::uint64_t>("synth.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.synth.seed; }));
    f.push_back(number_field<std::uint64_t>("eval.noise_seed",
                                            [](ExperimentConfig& c) -> std::uint64_t& { return c.eval.noise_seed; }));
    f.push_back({"eval.iou_thresholds", [](const ExperimentConfig& c) { return format_list(c.eval.iou_thresholds); },
                 [](ExperimentConfig& c, const std::string& v) {
                   c.eval.iou_thresholds = parse_list("eval.iou_thresholds", v);
                 }});
    f.push_back(number_field<int>("eval.batch_size", [](ExperimentConfig& c) -> int& { return c.eval.batch_size; }));
    return f;
  }();
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  crop.validate();
  noise.validate();
  train.validate();
  synth.validate();
  require(split.train_fraction > 0 && split.train_fraction < 1, ErrorKind::Config,
          "split.train_fraction must lie in (0, 1)");
  require(!eval.iou_thresholds.empty(), ErrorKind::Config, "eval.iou_thresholds must not be empty");
  for (double t : eval.iou_thresholds) {
    require(t >= 0 && t < 1, ErrorKind::Config, "eval.iou_thresholds values must lie in [0, 1)");
  }
  require(eval.batch_size >= 1, ErrorKind::Config, "eval.batch_size must be >= 1");
  const auto backbone = make_backbone(architecture);
  require(backbone->crop_size() == crop.size, ErrorKind::Config,
          "crop.size " + std::to_string(crop.size) + " does not match model.architecture input size " +
              std::to_string(backbone->crop_size()));
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const auto& field : fields()) {
    if (field.key == key) {
      field.set(config, value);
      return;
    }
  }
  fail(ErrorKind::Config, "unknown config key '" + key + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& field : fields()) out.push_back(field.key);
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config, where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (const auto& k : seen) require(k != key, ErrorKind::Config, where + "duplicate key '" + key + "'");
    seen.push_back(key);
    try {
      set_config_value(config, key, value);
    } catch (const Error& e) {
      fail(ErrorKind::Config, where + e.detail());
    }
  }
  config.validate();
  return config;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& field : fields()) out += field.key + " = " + field.get(config) + "\n";
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write config " + path.string());
  out << serialize_config(config);
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing config " + path.string());
}

}  // namespace lightcorners
