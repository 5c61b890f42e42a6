#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lightcorners/geometry.hpp"
#include "lightcorners/noise.hpp"
#include "lightcorners/synth.hpp"
#include "lightcorners/train.hpp"

namespace lightcorners {

struct SplitConfig {
  std::uint64_t seed = 42;
  double train_fraction = 0.8;

  bool operator==(const SplitConfig&) const = default;
};

struct EvalConfig {
  std::uint64_t noise_seed = 2024;  // frozen test-time center noise
  std::vector<double> iou_thresholds = {0.25, 0.5};
  int batch_size = 32;

  bool operator==(const EvalConfig&) const = default;
};

// Everything one experiment depends on. Text form: one `key = value` per
// line, `#` comments, every key optional (defaults below), unknown keys rejected.
struct ExperimentConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path output_dir = "runs";
  std::string architecture = "conv-gap:S=128:16,32,64,128";
  CropSpec crop;
  NoiseConfig noise;
  bool train_noise = false;  // perturb training centers
  TrainConfig train;
  SplitConfig split;
  SynthConfig synth;
  EvalConfig eval;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
std::string serialize_config(const ExperimentConfig& config);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

// Applies a single `key`, `value` pair; throws Error(Config) on unknown keys or bad values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();

}  // namespace lightcorners
