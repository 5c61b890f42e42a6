#include "lightcorners/train.hpp"

#include <algorithm>
#include <mutex>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "lightcorners/errors.hpp"

namespace lightcorners {

std::string_view to_string(FlipRouting routing) noexcept {
  return routing == FlipRouting::Mirrored ? "mirrored" : "same";
}

FlipRouting parse_flip_routing(std::string_view name) {
  if (name == "mirrored") return FlipRouting::Mirrored;
  if (name == "same") return FlipRouting::Same;
  fail(ErrorKind::Config, "unknown flip routing '" + std::string(name) + "' (expected mirrored or same)");
}

void TrainConfig::validate() const {
  require(lr >= 0, ErrorKind::Config, "train.lr must be >= 0");
  require(weight_decay >= 0, ErrorKind::Config, "train.weight_decay must be >= 0");
  require(epochs >= 1, ErrorKind::Config, "train.epochs must be >= 1");
  require(batch_size >= 1, ErrorKind::Config, "train.batch_size must be >= 1");
  require(swa_start_epoch >= 1 && swa_start_epoch <= epochs, ErrorKind::Config,
          "train.swa_start_epoch must lie in [1, train.epochs]");
  require(swa_lr_decay > 0, ErrorKind::Config, "train.swa_lr_decay must be > 0");
}

AdamConfig TrainConfig::adam() const {
  AdamConfig out;
  out.lr = lr;
  out.weight_decay = weight_decay;
  return out;
}

SwaSchedule TrainConfig::swa() const { return {swa_start_epoch, swa_lr_decay}; }

std::vector<PoolEntry> training_pool(std::span<const LightExample> examples, LightType type, const TrainConfig& cfg) {
  std::vector<PoolEntry> pool;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].annotation.light_type == type) pool.push_back({i, false});
  }
  if (!cfg.augment) return pool;
  const LightType source = cfg.flip_routing == FlipRouting::Mirrored ? mirrored(type) : type;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].annotation.light_type == source) pool.push_back({i, true});
  }
  return pool;
}

namespace {

std::uint64_t type_seed(std::uint64_t seed, LightType type) { return derive_seed(seed, 1 + index_of(type)); }

// Keeps per-step activation buffers on the heap rather than in fresh mmaps.
void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    mallopt(M_TOP_PAD, 64 << 20);
  });
#endif
}

}  // namespace

std::vector<PoolEntry> epoch_order(std::span<const PoolEntry> pool, LightType type, int epoch,
                                   const TrainConfig& cfg) {
  std::vector<PoolEntry> order(pool.begin(), pool.end());
  Rng rng(derive_seed(type_seed(cfg.seed, type), static_cast<std::uint64_t>(epoch)));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

CropSample materialize(const LightExample& example, const PoolEntry& entry, const NoiseConfig* noise, Rng* rng) {
  CropSample sample = noise ? example.crop(apply_noise(example.annotation, *noise, *rng).center) : example.crop();
  return entry.flip ? flip_horizontal(sample) : sample;
}

RegressorParams initial_params(const CornerRegressor& model, LightType type, const TrainConfig& cfg) {
  return model.init(derive_seed(cfg.seed, 100 + index_of(type)));
}

TrainResult train_light_model(const CornerRegressor& model, std::span<const LightExample> examples, LightType type,
                              const TrainConfig& cfg, const std::optional<NoiseConfig>& noise,
                              const EpochCallback& on_epoch) {
  cfg.validate();
  if (noise) noise->validate();
  tune_allocator();
  const int crop_size = model.backbone().crop_size();
  for (const auto& example : examples) {
    require(example.spec.size == crop_size, ErrorKind::InvalidInput,
            "example crop size " + std::to_string(example.spec.size) + " does not match the network input " +
                std::to_string(crop_size));
    if (noise) {
      require(example.margin >= margin_for_clip(noise->clip), ErrorKind::InvalidInput,
              "example patches are too small for the configured noise clip");
    }
  }
  const auto pool = training_pool(examples, type, cfg);
  require(!pool.empty(), ErrorKind::InvalidInput,
          "no training samples for light type " + std::string(short_name(type)));

  TrainResult result;
  result.samples = pool.size();
  RegressorParams params = initial_params(model, type, cfg);
  AdamState adam = AdamState::for_params(params);
  AdamConfig adam_cfg = cfg.adam();
  const SwaSchedule schedule = cfg.swa();
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);

  std::vector<CropSample> samples;
  std::vector<const CropSample*> batch_ptrs;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    adam_cfg.lr = scheduled_lr(cfg.lr, epoch, schedule);
    const auto order = epoch_order(pool, type, epoch, cfg);
    Rng noise_rng(noise ? derive_seed(type_seed(noise->seed, type), static_cast<std::uint64_t>(epoch)) : 0);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      samples.clear();
      for (std::size_t k = start; k < end; ++k) {
        samples.push_back(materialize(examples[order[k].example], order[k], noise ? &*noise : nullptr, &noise_rng));
      }
      batch_ptrs.clear();
      for (const auto& s : samples) batch_ptrs.push_back(&s);
      const auto step = model.loss_and_gradients(params, make_batch(batch_ptrs));
      loss_sum += step.loss * static_cast<double>(end - start);
      adam_step(params, step.gradients, adam, adam_cfg);
    }
    const double mean_loss = loss_sum / static_cast<double>(order.size());
    result.loss_trace.push_back(mean_loss);
    swa_update(result.swa, params, epoch, schedule);
    if (on_epoch) on_epoch(type, epoch, mean_loss);
  }
  result.params = result.swa.count > 0 ? result.swa.average(params) : std::move(params);
  require(result.params.all_finite(), ErrorKind::Numeric,
          "trained parameters for " + std::string(short_name(type)) + " are not finite");
  return result;
}

void ModelRegistry::set(LightType type, RegressorParams params) { models_[type] = std::move(params); }

bool ModelRegistry::contains(LightType type) const noexcept { return models_.contains(type); }

const RegressorParams& ModelRegistry::at(LightType type) const {
  const auto it = models_.find(type);
  require(it != models_.end(), ErrorKind::Config,
          "no trained model for light type " + std::string(short_name(type)));
  return it->second;
}

std::vector<LightType> ModelRegistry::types() const {
  std::vector<LightType> out;
  for (const auto& [type, params] : models_) out.push_back(type);
  return out;
}

CornerPrediction predict(const CornerRegressor& model, const ModelRegistry& registry, const CropSample& sample) {
  return model.predict(registry.at(sample.light_type), sample.pixels);
}

std::vector<EvalExample> evaluate_samples(const CornerRegressor& model, const RegressorParams& params,
                                          std::span<const CropSample> samples, int batch_size) {
  require(batch_size >= 1, ErrorKind::InvalidInput, "batch size must be >= 1");
  std::vector<EvalExample> out;
  out.reserve(samples.size());
  std::vector<const Image*> crops;
  for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(batch_size));
    crops.clear();
    for (std::size_t k = start; k < end; ++k) crops.push_back(&samples[k].pixels);
    const auto predictions = model.predict(params, crops);
    for (std::size_t k = start; k < end; ++k) out.push_back(make_eval_example(samples[k], predictions[k - start]));
  }
  return out;
}

}  // namespace lightcorners
