#include "lightcorners/network.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "lightcorners/errors.hpp"

namespace lightcorners {
namespace {

Tensor uniform_fan_in(Shape shape, int fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(3.0 / fan_in);
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> values(element_count(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(values));
}

int parse_int(std::string_view text, const std::string& descriptor) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(ec == std::errc() && ptr == text.data() + text.size() && value > 0, ErrorKind::Config,
          "malformed architecture descriptor '" + descriptor + "'");
  return value;
}

}  // namespace

ConvBackbone::ConvBackbone(int crop_size, std::vector<int> widths) : crop_size_(crop_size), widths_(std::move(widths)) {
  require(crop_size_ > 0 && !widths_.empty(), ErrorKind::Config, "backbone needs a positive crop size and >= 1 block");
  for (int w : widths_) require(w > 0, ErrorKind::Config, "backbone channel widths must be positive");
}

std::string ConvBackbone::descriptor() const {
  std::ostringstream out;
  out << "conv-gap:S=" << crop_size_ << ':';
  for (std::size_t i = 0; i < widths_.size(); ++i) out << (i ? "," : "") << widths_[i];
  return out.str();
}

std::vector<NamedTensor> ConvBackbone::init(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<NamedTensor> params;
  int in_channels = 3;
  for (std::size_t b = 0; b < widths_.size(); ++b) {
    const std::string prefix = "conv" + std::to_string(b + 1);
    const int fan_in = in_channels * 9;
    params.push_back({prefix + ".kernel", uniform_fan_in({widths_[b], in_channels, 3, 3}, fan_in, rng)});
    params.push_back({prefix + ".bias", Tensor::zeros({widths_[b]})});
    in_channels = widths_[b];
  }
  return params;
}

Tensor ConvBackbone::features(std::span<const NamedTensor> params, const Tensor& input) const {
  require(params.size() == 2 * widths_.size(), ErrorKind::InvalidInput, "backbone parameter count mismatch");
  Tensor x = input;
  for (std::size_t b = 0; b < widths_.size(); ++b) {
    const auto& kernel = params[2 * b];
    const auto& bias = params[2 * b + 1];
    const std::string name = "conv" + std::to_string(b + 1);
    x = ops::conv2d(x, kernel.tensor, bias.tensor, /*stride=*/2, /*pad=*/1, name);
    x = ops::tanh(x, name + ".tanh");
  }
  return ops::global_avg_pool(x, "gap");
}

std::shared_ptr<const Backbone> make_backbone(const std::string& descriptor) {
  constexpr std::string_view kPrefix = "conv-gap:S=";
  require(descriptor.rfind(kPrefix, 0) == 0, ErrorKind::Config, "unknown backbone '" + descriptor + "'");
  const std::string_view rest = std::string_view(descriptor).substr(kPrefix.size());
  const auto colon = rest.find(':');
  require(colon != std::string_view::npos, ErrorKind::Config, "malformed architecture descriptor '" + descriptor + "'");
  const int size = parse_int(rest.substr(0, colon), descriptor);
  std::vector<int> widths;
  std::string_view list = rest.substr(colon + 1);
  while (!list.empty()) {
    const auto comma = list.find(',');
    widths.push_back(parse_int(list.substr(0, comma), descriptor));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return std::make_shared<ConvBackbone>(size, std::move(widths));
}

std::size_t RegressorParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& t : tensors) total += t.tensor.size();
  return total;
}

RegressorParams RegressorParams::clone() const {
  RegressorParams out{architecture, {}};
  out.tensors.reserve(tensors.size());
  for (const auto& t : tensors) out.tensors.push_back({t.name, Tensor::from(t.tensor.shape(), {t.tensor.values().begin(), t.tensor.values().end()})});
  return out;
}

bool RegressorParams::all_finite() const {
  for (const auto& t : tensors) {
    for (double v : t.tensor.values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

Tensor image_tensor(std::span<const Image* const> crops) {
  require(!crops.empty(), ErrorKind::InvalidInput, "empty crop batch");
  const int size = crops.front()->width;
  std::vector<double> values(crops.size() * 3 * static_cast<std::size_t>(size) * size);
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  for (std::size_t n = 0; n < crops.size(); ++n) {
    const Image& crop = *crops[n];
    require(crop.width == size && crop.height == size, ErrorKind::InvalidInput,
            "crop batch must hold square crops of one size");
    double* dst = values.data() + n * 3 * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      for (int c = 0; c < 3; ++c) dst[c * plane + p] = crop.rgb[3 * p + c] / 255.0;
    }
  }
  return Tensor::from({static_cast<int>(crops.size()), 3, size, size}, std::move(values));
}

Batch make_batch(std::span<const CropSample* const> samples) {
  std::vector<const Image*> crops;
  crops.reserve(samples.size());
  for (const auto* s : samples) crops.push_back(&s->pixels);
  const int n = static_cast<int>(samples.size());
  std::vector<double> targets(8 * samples.size());
  std::vector<double> weights(4 * samples.size());
  std::vector<int> visible(samples.size());
  for (int i = 0; i < n; ++i) {
    const auto& s = *samples[i];
    for (int j = 0; j < kCorners; ++j) {
      targets[8 * i + 2 * j] = s.targets[j].x;
      targets[8 * i + 2 * j + 1] = s.targets[j].y;
      weights[4 * i + j] = s.mask[j] ? 1.0 : kInvisibleCornerWeight;
    }
    visible[i] = s.visible_count;
  }
  return {image_tensor(crops), Tensor::from({n, 8}, std::move(targets)), Tensor::from({n, 4}, std::move(weights)),
          std::move(visible)};
}

CornerRegressor::CornerRegressor(std::shared_ptr<const Backbone> backbone) : backbone_(std::move(backbone)) {
  require(backbone_ != nullptr, ErrorKind::Config, "corner regressor needs a backbone");
}

RegressorParams CornerRegressor::init(std::uint64_t seed) const {
  RegressorParams params{architecture(), backbone_->init(seed)};
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  const int features = backbone_->feature_dim();
  params.tensors.push_back({"head.weight", uniform_fan_in({8, features}, features, rng)});
  params.tensors.push_back({"head.bias", Tensor::zeros({8})});
  return params;
}

RegressorParams CornerRegressor::zeros() const {
  RegressorParams params = init(0);
  for (auto& t : params.tensors) std::fill(t.tensor.values().begin(), t.tensor.values().end(), 0.0);
  return params;
}

void CornerRegressor::check_params(const RegressorParams& params) const {
  require(params.architecture == architecture(), ErrorKind::Config,
          "parameters built for '" + params.architecture + "' but model is '" + architecture() + "'");
  require(params.tensors.size() >= 2, ErrorKind::Config, "regressor parameters lack a head");
}

Tensor CornerRegressor::forward(const RegressorParams& params, const Tensor& input) const {
  check_params(params);
  const int s = backbone_->crop_size();
  require(input.defined() && input.shape().size() == 4 && input.dim(1) == 3 && input.dim(2) == s && input.dim(3) == s,
          ErrorKind::InvalidInput,
          "expected crops shaped [N, 3, " + std::to_string(s) + ", " + std::to_string(s) + "], got " +
              (input.defined() ? to_string(input.shape()) : std::string("undefined")));
  const std::span<const NamedTensor> all(params.tensors);
  const auto features = backbone_->features(all.first(all.size() - 2), input);
  const auto& weight = all[all.size() - 2].tensor;
  const auto& bias = all[all.size() - 1].tensor;
  return ops::tanh(ops::linear(features, weight, bias, "head"), "head.tanh");
}

std::vector<CornerPrediction> CornerRegressor::predict(const RegressorParams& params,
                                                       std::span<const Image* const> crops) const {
  const Tensor out = forward(params, image_tensor(crops));
  std::vector<CornerPrediction> predictions(crops.size());
  const auto values = out.values();
  for (std::size_t n = 0; n < crops.size(); ++n) {
    std::copy(values.begin() + 8 * n, values.begin() + 8 * (n + 1), predictions[n].begin());
  }
  return predictions;
}

CornerPrediction CornerRegressor::predict(const RegressorParams& params, const Image& crop) const {
  const Image* crops[] = {&crop};
  return predict(params, crops).front();
}

CornerRegressor::LossAndGradients CornerRegressor::loss_and_gradients(const RegressorParams& params,
                                                                      const Batch& batch) const {
  RegressorParams live{params.architecture, {}};
  live.tensors.reserve(params.tensors.size());
  for (const auto& t : params.tensors) {
    live.tensors.push_back(
        {t.name, Tensor::from(t.tensor.shape(), {t.tensor.values().begin(), t.tensor.values().end()}, true)});
  }
  const Tensor predictions = forward(live, batch.pixels);
  const Tensor loss = ops::masked_corner_loss(predictions, batch.targets, batch.weights, batch.visible);
  backward(loss);
  LossAndGradients out;
  out.loss = loss.values()[0];
  out.gradients.reserve(live.tensors.size());
  for (const auto& t : live.tensors) {
    const auto g = t.tensor.grad();
    out.gradients.emplace_back(g.begin(), g.end());
    if (out.gradients.back().empty()) out.gradients.back().assign(t.tensor.size(), 0.0);
  }
  return out;
}

}  // namespace lightcorners
