#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lightcorners/metrics.hpp"
#include "lightcorners/network.hpp"
#include "lightcorners/noise.hpp"
#include "lightcorners/optim.hpp"
#include "lightcorners/samples.hpp"

namespace lightcorners {

// Which model a horizontally flipped sample trains. Mirrored: a flipped FR
// crop (now labelled FL) trains the FL model. Same: a flipped FL crop keeps
// training the FL model.
enum class FlipRouting { Mirrored, Same };

std::string_view to_string(FlipRouting routing) noexcept;
FlipRouting parse_flip_routing(std::string_view name);

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-4;
  int epochs = 25;
  int batch_size = 16;
  int swa_start_epoch = 20;
  double swa_lr_decay = 0.1;
  std::uint64_t seed = 1;
  bool augment = false;  // add horizontally flipped crops
  FlipRouting flip_routing = FlipRouting::Mirrored;

  void validate() const;
  AdamConfig adam() const;
  SwaSchedule swa() const;
  bool operator==(const TrainConfig&) const = default;
};

// One training item: an example, optionally mirrored.
struct PoolEntry {
  std::size_t example = 0;
  bool flip = false;

  bool operator==(const PoolEntry&) const = default;
};

// Every item that trains the `type` model, in dataset order.
std::vector<PoolEntry> training_pool(std::span<const LightExample> examples, LightType type, const TrainConfig& cfg);

// Deterministic shuffle of the pool for a 1-based epoch.
std::vector<PoolEntry> epoch_order(std::span<const PoolEntry> pool, LightType type, int epoch,
                                   const TrainConfig& cfg);

// Crop for one item; with noise, the center is perturbed using `rng`.
CropSample materialize(const LightExample& example, const PoolEntry& entry, const NoiseConfig* noise, Rng* rng);

struct TrainResult {
  RegressorParams params;  // SWA average when snapshots exist, else the last iterate
  SwaState swa;
  std::vector<double> loss_trace;  // mean training loss per epoch
  std::size_t samples = 0;         // pool size
};

using EpochCallback = std::function<void(LightType type, int epoch, double mean_loss)>;

// Trains the model for one light type. `noise`, when given, perturbs every
// training crop center with a fresh draw each epoch; the examples' margin
// must cover noise->clip.
TrainResult train_light_model(const CornerRegressor& model, std::span<const LightExample> examples, LightType type,
                              const TrainConfig& cfg, const std::optional<NoiseConfig>& noise = std::nullopt,
                              const EpochCallback& on_epoch = {});

// Independently seeded initial weights of the `type` model.
RegressorParams initial_params(const CornerRegressor& model, LightType type, const TrainConfig& cfg);

class ModelRegistry {
 public:
  void set(LightType type, RegressorParams params);
  bool contains(LightType type) const noexcept;
  // Throws Error(Config) naming the type when no model is registered.
  const RegressorParams& at(LightType type) const;
  std::vector<LightType> types() const;

 private:
  std::map<LightType, RegressorParams> models_;
};

// Routes the crop to the model for its light type.
CornerPrediction predict(const CornerRegressor& model, const ModelRegistry& registry, const CropSample& sample);

// Batched inference, paired with targets for scoring.
std::vector<EvalExample> evaluate_samples(const CornerRegressor& model, const RegressorParams& params,
                                          std::span<const CropSample> samples, int batch_size = 32);

}  // namespace lightcorners
