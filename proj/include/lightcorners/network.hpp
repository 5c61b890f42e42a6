#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lightcorners/geometry.hpp"
#include "lightcorners/tensor.hpp"

namespace lightcorners {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Any differentiable map from a [N, 3, S, S] crop batch to [N, F] features.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual int crop_size() const = 0;
  virtual int feature_dim() const = 0;
  // Round-trips through make_backbone().
  virtual std::string descriptor() const = 0;
  virtual std::vector<NamedTensor> init(std::uint64_t seed) const = 0;
  virtual Tensor features(std::span<const NamedTensor> params, const Tensor& input) const = 0;
};

// Reference backbone: conv3x3/stride-2 blocks, each followed by tanh, then a
// global average pool. Descriptor: "conv-gap:S=128:16,32,64,128".
class ConvBackbone final : public Backbone {
 public:
  explicit ConvBackbone(int crop_size = 128, std::vector<int> widths = {16, 32, 64, 128});

  int crop_size() const override { return crop_size_; }
  int feature_dim() const override { return widths_.back(); }
  std::string descriptor() const override;
  std::vector<NamedTensor> init(std::uint64_t seed) const override;
  Tensor features(std::span<const NamedTensor> params, const Tensor& input) const override;

  const std::vector<int>& widths() const noexcept { return widths_; }

 private:
  int crop_size_;
  std::vector<int> widths_;
};

std::shared_ptr<const Backbone> make_backbone(const std::string& descriptor);

// Ordered parameter set of one corner regressor: backbone tensors followed by
// "head.weight" [8, F] and "head.bias" [8].
struct RegressorParams {
  std::string architecture;
  std::vector<NamedTensor> tensors;

  std::size_t parameter_count() const;
  RegressorParams clone() const;
  bool all_finite() const;
};

struct Batch {
  Tensor pixels;           // [N, 3, S, S], intensities in [0, 1]
  Tensor targets;          // [N, 8]
  Tensor weights;          // [N, 4], M_ij
  std::vector<int> visible;
};

inline constexpr double kInvisibleCornerWeight = 1e-8;

Tensor image_tensor(std::span<const Image* const> crops);
Batch make_batch(std::span<const CropSample* const> samples);

// Crop -> tanh(dense(backbone(crop))), 8 values per crop.
class CornerRegressor {
 public:
  explicit CornerRegressor(std::shared_ptr<const Backbone> backbone);

  const Backbone& backbone() const noexcept { return *backbone_; }
  std::string architecture() const { return backbone_->descriptor(); }

  RegressorParams init(std::uint64_t seed) const;
  RegressorParams zeros() const;

  // [N, 3, S, S] -> [N, 8]
  Tensor forward(const RegressorParams& params, const Tensor& input) const;
  CornerPrediction predict(const RegressorParams& params, const Image& crop) const;
  std::vector<CornerPrediction> predict(const RegressorParams& params, std::span<const Image* const> crops) const;

  struct LossAndGradients {
    double loss = 0.0;
    std::vector<std::vector<double>> gradients;  // one per parameter tensor, same order
  };
  LossAndGradients loss_and_gradients(const RegressorParams& params, const Batch& batch) const;

 private:
  void check_params(const RegressorParams& params) const;
  std::shared_ptr<const Backbone> backbone_;
};

}  // namespace lightcorners
