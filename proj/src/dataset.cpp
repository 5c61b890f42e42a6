#include "lightcorners/dataset.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "lightcorners/annotations.hpp"
#include "lightcorners/errors.hpp"
#include "lightcorners/image.hpp"
#include "lightcorners/split.hpp"

namespace lightcorners {

Point frozen_noise(const NoiseConfig& cfg, std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, index));
  return sample_noise(cfg, rng);
}

std::map<LightType, std::size_t> count_by_type(const std::vector<LightAnnotation>& annotations) {
  std::map<LightType, std::size_t> counts;
  for (LightType type : kLightTypes) counts[type] = 0;
  for (const auto& a : annotations) ++counts[a.light_type];
  return counts;
}

Manifest make_manifest(const std::vector<LightAnnotation>& annotations, double train_fraction,
                       std::uint64_t split_seed, const NoiseConfig& noise, std::uint64_t noise_seed,
                       std::vector<std::string>* warnings) {
  noise.validate();
  Manifest m;
  m.records = annotations.size();
  m.split_seed = split_seed;
  m.train_fraction = train_fraction;
  auto parts = split(annotations, train_fraction, split_seed);
  m.train = std::move(parts.train);
  m.test = std::move(parts.test);
  if (warnings) warnings->insert(warnings->end(), parts.warnings.begin(), parts.warnings.end());
  m.test_noise_config = noise;
  m.test_noise_seed = noise_seed;
  for (std::size_t index : m.test) m.test_noise.push_back(frozen_noise(noise, noise_seed, index));
  m.counts = count_by_type(annotations);
  return m;
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["format"] = "lightcorners-manifest";
  j["version"] = 1;
  j["annotations"] = m.annotations;
  j["records"] = m.records;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [type, n] : m.counts) counts[std::string(short_name(type))] = n;
  j["counts"] = counts;
  j["split"] = {{"seed", m.split_seed}, {"train_fraction", m.train_fraction}, {"train", m.train}, {"test", m.test}};
  nlohmann::ordered_json offsets = nlohmann::ordered_json::array();
  for (const auto& e : m.test_noise) offsets.push_back({e.x, e.y});
  j["test_noise"] = {{"seed", m.test_noise_seed},
                     {"p_zero", m.test_noise_config.p_zero},
                     {"sigma", m.test_noise_config.sigma},
                     {"clip", m.test_noise_config.clip},
                     {"offsets", offsets}};
  return j.dump(1) + "\n";
}

Manifest parse_manifest(const std::string& text, const std::string& source) {
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    require(j.at("format") == "lightcorners-manifest", ErrorKind::Validation, "not a lightcorners manifest");
    require(j.at("version") == 1, ErrorKind::Validation, "unsupported manifest version");
    m.annotations = j.at("annotations").get<std::string>();
    m.records = j.at("records").get<std::size_t>();
    for (const auto& [name, n] : j.at("counts").items()) m.counts[parse_light_type(name)] = n.get<std::size_t>();
    const auto& s = j.at("split");
    m.split_seed = s.at("seed").get<std::uint64_t>();
    m.train_fraction = s.at("train_fraction").get<double>();
    m.train = s.at("train").get<std::vector<std::size_t>>();
    m.test = s.at("test").get<std::vector<std::size_t>>();
    const auto& n = j.at("test_noise");
    m.test_noise_seed = n.at("seed").get<std::uint64_t>();
    m.test_noise_config.p_zero = n.at("p_zero").get<double>();
    m.test_noise_config.sigma = n.at("sigma").get<double>();
    m.test_noise_config.clip = n.at("clip").get<double>();
    m.test_noise_config.seed = m.test_noise_seed;
    for (const auto& e : n.at("offsets")) m.test_noise.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, source + ": " + e.what());
  } catch (const Error& e) {
    fail(e.kind(), source + ": " + e.detail());
  }
  require(m.test_noise.size() == m.test.size(), ErrorKind::Validation,
          source + ": test noise offsets do not match the test split");
  std::vector<bool> seen(m.records, false);
  for (const auto* part : {&m.train, &m.test}) {
    for (std::size_t index : *part) {
      require(index < m.records && !seen[index], ErrorKind::Validation,
              source + ": split indices are not a partition of the records");
      seen[index] = true;
    }
  }
  require(m.train.size() + m.test.size() == m.records, ErrorKind::Validation,
          source + ": split indices are not a partition of the records");
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out << manifest_json(manifest);
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.string());
}

std::vector<LightAnnotation> Dataset::select(const std::vector<std::size_t>& indices) const {
  std::vector<LightAnnotation> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(annotations.at(i));
  return out;
}

Dataset open_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.dir = dir;
  d.manifest = read_manifest(dir / kManifestFile);
  d.annotations = load_annotations(dir / d.manifest.annotations);
  require(d.annotations.size() == d.manifest.records, ErrorKind::Validation,
          "manifest lists " + std::to_string(d.manifest.records) + " records but " + d.manifest.annotations +
              " has " + std::to_string(d.annotations.size()));
  return d;
}

std::vector<LightExample> build_examples(const std::filesystem::path& dir,
                                         const std::vector<LightAnnotation>& annotations, const CropSpec& spec,
                                         int margin) {
  std::vector<LightExample> out(annotations.size());
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < annotations.size(); ++i) by_image[annotations[i].image].push_back(i);
  for (const auto& [name, indices] : by_image) {
    const Image scene = read_image(dir / name);
    for (std::size_t i : indices) {
      validate(annotations[i], scene.width, scene.height);
      out[i] = make_example(scene, annotations[i], spec, margin);
    }
  }
  return out;
}

}  // namespace lightcorners
