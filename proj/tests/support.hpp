#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lightcorners/geometry.hpp"
#include "lightcorners/image.hpp"
#include "lightcorners/metrics.hpp"
#include "lightcorners/noise.hpp"
#include "lightcorners/tensor.hpp"

namespace testing {

using namespace lightcorners;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lightcorners_test_" + std::to_string(getpid_wrapper()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static long getpid_wrapper();
  std::filesystem::path path_;
};

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Image random_image(Rng& rng, int w, int h) {
  Image img(w, h);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(uniform_int(rng, 1, 255));
  return img;
}

// Valid annotation inside a w x h scene; at least one visible corner.
inline LightAnnotation random_annotation(Rng& rng, int w, int h) {
  LightAnnotation a;
  a.image = "scene.ppm";
  const double x0 = std::floor(uniform(rng, 0, w - 20)), y0 = std::floor(uniform(rng, 0, h - 20));
  const double x1 = std::min<double>(w, x0 + std::floor(uniform(rng, 10, 250)));
  const double y1 = std::min<double>(h, y0 + std::floor(uniform(rng, 10, 200)));
  a.vehicle = {x0, y0, x1, y1};
  a.light_type = kLightTypes[uniform_int(rng, 0, 3)];
  a.center = {uniform(rng, x0, x1), uniform(rng, y0, y1)};
  const int forced = uniform_int(rng, 0, 3);
  for (int j = 0; j < kCorners; ++j) {
    if (j == forced || uniform(rng, 0, 1) < 0.7) {
      a.corners[j] = Point{std::clamp(a.center.x + uniform(rng, -40, 40), 0.0, double(w)),
                           std::clamp(a.center.y + uniform(rng, -40, 40), 0.0, double(h))};
    }
  }
  return a;
}

// Random evaluated light with predictions and targets in [-1, 1].
inline EvalExample random_eval_example(Rng& rng) {
  EvalExample e;
  const int forced = uniform_int(rng, 0, 3);
  for (int j = 0; j < kCorners; ++j) {
    e.prediction[2 * j] = uniform(rng, -1, 1);
    e.prediction[2 * j + 1] = uniform(rng, -1, 1);
    e.mask[j] = j == forced || uniform(rng, 0, 1) < 0.6;
    if (e.mask[j]) e.targets[j] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
  }
  e.visible_count = static_cast<int>(std::count(e.mask.begin(), e.mask.end(), true));
  e.box_w = uniform(rng, 1, 60);
  e.box_h = uniform(rng, 1, 60);
  e.crop_center = {uniform(rng, 0, 640), uniform(rng, 0, 480)};
  return e;
}

// Straightforward scalar loops over raw arrays, written without any library helper.
struct NaiveBatch {
  std::vector<double> p;    // N x 8
  std::vector<double> t;    // N x 8
  std::vector<int> vis;     // N x 4, 0 or 1
  std::vector<double> w;    // N box widths
  std::vector<double> hgt;  // N box heights
  std::size_t n = 0;
};

inline NaiveBatch to_naive(const std::vector<EvalExample>& batch) {
  NaiveBatch b;
  b.n = batch.size();
  for (const auto& e : batch) {
    for (int k = 0; k < 8; ++k) b.p.push_back(e.prediction[k]);
    for (int j = 0; j < 4; ++j) {
      b.t.push_back(e.targets[j].x);
      b.t.push_back(e.targets[j].y);
      b.vis.push_back(e.mask[j] ? 1 : 0);
    }
    b.w.push_back(e.box_w);
    b.hgt.push_back(e.box_h);
  }
  return b;
}

inline double naive_example_sum(const NaiveBatch& b, std::size_t i, double scale) {
  double sum = 0;
  int v = 0;
  for (int j = 0; j < 4; ++j) {
    const double m = b.vis[4 * i + j] ? 1.0 : 0.00000001;
    v += b.vis[4 * i + j];
    const double dx = b.p[8 * i + 2 * j] * m - b.t[8 * i + 2 * j];
    const double dy = b.p[8 * i + 2 * j + 1] * m - b.t[8 * i + 2 * j + 1];
    sum += scale * std::sqrt(dx * dx + dy * dy);
  }
  return sum / v;
}

inline double naive_loss(const NaiveBatch& b) {
  double total = 0;
  for (std::size_t i = 0; i < b.n; ++i) total += naive_example_sum(b, i, 1.0);
  return total / double(b.n);
}

inline double naive_ade(const NaiveBatch& b, double half) {
  double total = 0;
  for (std::size_t i = 0; i < b.n; ++i) total += naive_example_sum(b, i, half);
  return total / double(b.n);
}

inline double naive_pct(const NaiveBatch& b, double half) {
  double total = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < b.n; ++i) {
    if (!(b.w[i] > 0 && b.hgt[i] > 0)) continue;
    total += naive_example_sum(b, i, half) / std::sqrt(b.w[i] * b.w[i] + b.hgt[i] * b.hgt[i]);
    ++used;
  }
  return 100.0 * total / double(used);
}

inline double rel_err(double a, double b) {
  const double denom = std::max(std::abs(a), std::abs(b));
  return denom == 0 ? 0 : std::abs(a - b) / denom;
}

// Gradient agreement of one coordinate: |a - n| / max(|a|, |n|, floor).
inline double grad_rel_err(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central-difference check of d f / d leaf[coord] for `count` random coordinates of `leaf`.
// `f` must build a fresh graph from the current leaf values and return a [1] tensor.
inline double max_fd_error(Tensor& leaf, const std::function<Tensor()>& f, int count, Rng& rng, double step = 1e-4) {
  leaf.zero_grad();
  const Tensor out = f();
  backward(out);
  const std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
  auto values = leaf.values();
  double worst = 0;
  for (int k = 0; k < count; ++k) {
    const std::size_t c = std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng);
    const double saved = values[c];
    values[c] = saved + step;
    const double plus = f().values()[0];
    values[c] = saved - step;
    const double minus = f().values()[0];
    values[c] = saved;
    const double numeric = (plus - minus) / (2 * step);
    const double a = analytic.empty() ? 0.0 : analytic[c];
    worst = std::max(worst, grad_rel_err(a, numeric));
  }
  return worst;
}

inline Tensor random_tensor(Rng& rng, Shape shape, double lo, double hi, bool requires_grad = true) {
  std::vector<double> v(element_count(shape));
  for (auto& x : v) x = uniform(rng, lo, hi);
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

}  // namespace testing

#include "lightcorners/network.hpp"

namespace testing {

struct GradcheckReport {
  double conv = 0;   // conv kernels and biases, through the full network
  double dense = 0;  // head weight and bias, through the full network
  double tanh = 0;   // tanh op in isolation
  double pool = 0;   // global average pool in isolation
  double input = 0;  // crop pixels, through every layer of the network
};

inline Batch random_batch(Rng& rng, int n, int size) {
  Batch b;
  b.pixels = random_tensor(rng, {n, 3, size, size}, 0, 1, false);
  std::vector<double> targets(8 * n), weights(4 * n);
  b.visible.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) {
      const bool vis = j == i % 4 || uniform(rng, 0, 1) < 0.7;
      weights[4 * i + j] = vis ? 1.0 : kInvisibleCornerWeight;
      b.visible[i] += vis;
      targets[8 * i + 2 * j] = vis ? uniform(rng, -0.8, 0.8) : 0.0;
      targets[8 * i + 2 * j + 1] = vis ? uniform(rng, -0.8, 0.8) : 0.0;
    }
  }
  b.targets = Tensor::from({n, 8}, targets);
  b.weights = Tensor::from({n, 4}, weights);
  return b;
}

// Coordinates are drawn from every tensor whose name contains `filter`.
inline double param_fd_error(const CornerRegressor& model, const RegressorParams& params, const Batch& batch,
                             const std::string& filter, int count, Rng& rng, double step = 1e-4) {
  const auto analytic = model.loss_and_gradients(params, batch).gradients;
  std::vector<std::size_t> candidates;
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    if (params.tensors[t].name.find(filter) != std::string::npos) candidates.push_back(t);
  }
  RegressorParams probe = params.clone();
  const auto loss_at = [&] {
    return ops::masked_corner_loss(model.forward(probe, batch.pixels), batch.targets, batch.weights, batch.visible)
        .values()[0];
  };
  double worst = 0;
  for (int k = 0; k < count; ++k) {
    const std::size_t t = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    auto values = probe.tensors[t].tensor.values();
    const std::size_t c = std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng);
    const double saved = values[c];
    values[c] = saved + step;
    const double plus = loss_at();
    values[c] = saved - step;
    const double minus = loss_at();
    values[c] = saved;
    worst = std::max(worst, grad_rel_err(analytic[t][c], (plus - minus) / (2 * step)));
  }
  return worst;
}

// Test-only scalar probe: sum_i y_i * w_i as a [1] tensor.
inline Tensor probe_dot(const Tensor& y, const std::vector<double>& w) {
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) total += y.values()[i] * w[i];
  return Tensor::make_result({1}, {total}, {y}, "probe", [w](Tensor::Node& node) {
    auto& g = node.parents[0].node()->grad_buffer();
    for (std::size_t i = 0; i < w.size(); ++i) g[i] += w[i] * node.grad[0];
  });
}

inline std::vector<double> random_weights(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (auto& v : w) v = uniform(rng, -1, 1);
  return w;
}

inline GradcheckReport gradient_check(int count, Rng& rng, int crop_size = 128, int batch_size = 2) {
  const CornerRegressor model(std::make_shared<ConvBackbone>(crop_size));
  const RegressorParams params = model.init(rng());
  const Batch batch = random_batch(rng, batch_size, crop_size);
  GradcheckReport r;
  r.conv = param_fd_error(model, params, batch, "conv", count, rng);
  r.dense = param_fd_error(model, params, batch, "head", count, rng);

  Tensor pixels = Tensor::from(batch.pixels.shape(), {batch.pixels.values().begin(), batch.pixels.values().end()},
                               true);
  r.input = max_fd_error(
      pixels,
      [&] { return ops::masked_corner_loss(model.forward(params, pixels), batch.targets, batch.weights, batch.visible); },
      count, rng);

  Tensor x = random_tensor(rng, {2, 8, 6, 6}, -2, 2);
  const auto wx = random_weights(rng, x.size());
  r.tanh = max_fd_error(x, [&] { return probe_dot(ops::tanh(x, "tanh"), wx); }, count, rng);

  Tensor z = random_tensor(rng, {3, 5, 4, 7}, -2, 2);
  const auto wz = random_weights(rng, 15);
  r.pool = max_fd_error(z, [&] { return probe_dot(ops::global_avg_pool(z, "gap"), wz); }, count, rng);
  return r;
}

}  // namespace testing
