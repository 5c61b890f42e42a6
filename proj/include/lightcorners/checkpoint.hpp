#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lightcorners/network.hpp"
#include "lightcorners/optim.hpp"

namespace lightcorners {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// One trained light model. `params` are the final (SWA-averaged) weights;
// `swa` keeps the running snapshot mean and count. Byte layout in
// docs/checkpoint_format.md.
struct Checkpoint {
  LightType light_type = LightType::FrontLeft;
  RegressorParams params;
  SwaSchedule schedule;
  SwaState swa;
  std::uint32_t epochs = 0;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// "model_FL.ckpt" etc.
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, LightType type);

}  // namespace lightcorners
