#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lightcorners/geometry.hpp"
#include "lightcorners/noise.hpp"
#include "lightcorners/samples.hpp"

namespace lightcorners {

inline constexpr const char* kAnnotationsFile = "annotations.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

// Split membership and the frozen test-time center noise of a dataset directory.
struct Manifest {
  std::string annotations = kAnnotationsFile;
  std::size_t records = 0;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;
  std::vector<std::size_t> train;  // indices into the annotation file
  std::vector<std::size_t> test;
  NoiseConfig test_noise_config;
  std::uint64_t test_noise_seed = 0;
  std::vector<Point> test_noise;  // epsilon per entry of `test`, before clamping
  std::map<LightType, std::size_t> counts;

  bool operator==(const Manifest&) const = default;
};

// Epsilon for test record `index`; a pure function of (cfg, seed, index).
Point frozen_noise(const NoiseConfig& cfg, std::uint64_t seed, std::size_t index);

Manifest make_manifest(const std::vector<LightAnnotation>& annotations, double train_fraction,
                       std::uint64_t split_seed, const NoiseConfig& noise, std::uint64_t noise_seed,
                       std::vector<std::string>* warnings = nullptr);

std::string manifest_json(const Manifest& manifest);
Manifest parse_manifest(const std::string& text, const std::string& source = "<manifest>");
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

struct Dataset {
  std::filesystem::path dir;
  std::vector<LightAnnotation> annotations;
  Manifest manifest;

  std::vector<LightAnnotation> select(const std::vector<std::size_t>& indices) const;
};

// Loads annotations and manifest, checking that they agree.
Dataset open_dataset(const std::filesystem::path& dir);

// Crops for the given records; every scene image is decoded once.
std::vector<LightExample> build_examples(const std::filesystem::path& dir,
                                         const std::vector<LightAnnotation>& annotations, const CropSpec& spec,
                                         int margin = 0);

std::map<LightType, std::size_t> count_by_type(const std::vector<LightAnnotation>& annotations);

}  // namespace lightcorners
