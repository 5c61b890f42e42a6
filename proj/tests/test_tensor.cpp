#include <doctest.h>

#include <cmath>
#include <limits>

#include "lightcorners/errors.hpp"
#include "lightcorners/network.hpp"
#include "lightcorners/tensor.hpp"
#include "support.hpp"

using namespace lightcorners;
using testing::random_tensor;

namespace {

std::vector<double> naive_conv(const Tensor& in, const Tensor& k, const Tensor& b, int stride, int pad) {
  const int n = in.dim(0), c = in.dim(1), h = in.dim(2), w = in.dim(3);
  const int o = k.dim(0), ks = k.dim(2);
  const int ho = (h + 2 * pad - ks) / stride + 1, wo = (w + 2 * pad - ks) / stride + 1;
  std::vector<double> out(static_cast<std::size_t>(n) * o * ho * wo);
  const auto x = in.values();
  const auto kv = k.values();
  for (int i = 0; i < n; ++i)
    for (int oc = 0; oc < o; ++oc)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          double acc = b.values()[oc];
          for (int ic = 0; ic < c; ++ic)
            for (int ky = 0; ky < ks; ++ky)
              for (int kx = 0; kx < ks; ++kx) {
                const int y = oy * stride - pad + ky, xx = ox * stride - pad + kx;
                if (y < 0 || y >= h || xx < 0 || xx >= w) continue;
                acc += kv[((oc * c + ic) * ks + ky) * ks + kx] * x[((i * c + ic) * h + y) * w + xx];
              }
          out[((i * o + oc) * ho + oy) * wo + ox] = acc;
        }
  return out;
}

}  // namespace

TEST_CASE("conv2d forward matches a direct loop") {
  Rng rng(1);
  for (const auto& [stride, pad, size] : std::vector<std::tuple<int, int, int>>{{1, 0, 7}, {2, 1, 8}, {2, 1, 9}, {1, 1, 5}}) {
    const Tensor in = random_tensor(rng, {2, 3, size, size}, -1, 1, false);
    const Tensor k = random_tensor(rng, {4, 3, 3, 3}, -1, 1, false);
    const Tensor b = random_tensor(rng, {4}, -1, 1, false);
    const Tensor out = ops::conv2d(in, k, b, stride, pad, "conv");
    const auto expected = naive_conv(in, k, b, stride, pad);
    REQUIRE(out.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(out.values()[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(2);
  for (const auto& [stride, pad] : std::vector<std::pair<int, int>>{{1, 0}, {2, 1}, {1, 1}}) {
    Tensor in = random_tensor(rng, {2, 3, 7, 7}, -1, 1);
    Tensor k = random_tensor(rng, {4, 3, 3, 3}, -1, 1);
    Tensor b = random_tensor(rng, {4}, -1, 1);
    const Tensor probe_shape = ops::conv2d(in, k, b, stride, pad, "conv");
    const auto w = testing::random_weights(rng, probe_shape.size());
    const auto f = [&] { return testing::probe_dot(ops::conv2d(in, k, b, stride, pad, "conv"), w); };
    CHECK(testing::max_fd_error(in, f, 64, rng) < 1e-4);
    CHECK(testing::max_fd_error(k, f, 64, rng) < 1e-4);
    CHECK(testing::max_fd_error(b, f, 4, rng) < 1e-4);
  }
}

TEST_CASE("linear, tanh and pooling gradients match finite differences") {
  Rng rng(3);
  Tensor x = random_tensor(rng, {3, 5}, -1, 1);
  Tensor w = random_tensor(rng, {4, 5}, -1, 1);
  Tensor b = random_tensor(rng, {4}, -1, 1);
  const auto probe = testing::random_weights(rng, 12);
  const auto f = [&] { return testing::probe_dot(ops::linear(x, w, b, "dense"), probe); };
  CHECK(testing::max_fd_error(x, f, 64, rng) < 1e-4);
  CHECK(testing::max_fd_error(w, f, 64, rng) < 1e-4);
  CHECK(testing::max_fd_error(b, f, 16, rng) < 1e-4);

  const auto report = testing::gradient_check(64, rng, 32, 2);
  CHECK(report.conv < 1e-4);
  CHECK(report.dense < 1e-4);
  CHECK(report.tanh < 1e-4);
  CHECK(report.pool < 1e-4);
  CHECK(report.input < 1e-4);
}

TEST_CASE("single dense layer gradient equals the hand-derived chain rule") {
  // Two-pixel "image" x, p = tanh(W x + b), loss over V visible corners.
  const std::vector<double> x{0.3, 0.8};
  std::vector<double> wv(16), bv(8), tv(8);
  for (int i = 0; i < 16; ++i) wv[i] = 0.05 * (i - 7);
  for (int i = 0; i < 8; ++i) {
    bv[i] = 0.02 * i - 0.05;
    tv[i] = 0.1 * (i % 3) - 0.1;
  }
  const std::vector<double> m{1, 1e-8, 1, 1};
  for (int j = 0; j < 4; ++j) {
    if (m[j] < 1) tv[2 * j] = tv[2 * j + 1] = 0;
  }
  Tensor W = Tensor::from({8, 2}, wv, true);
  Tensor B = Tensor::from({8}, bv, true);
  const Tensor X = Tensor::from({1, 2}, x);
  const Tensor p = ops::tanh(ops::linear(X, W, B, "dense"), "tanh");
  backward(ops::masked_corner_loss(p, Tensor::from({1, 8}, tv), Tensor::from({1, 4}, m), {3}));

  std::vector<double> dz(8);
  for (int j = 0; j < 4; ++j) {
    double pz[2], r[2];
    for (int a = 0; a < 2; ++a) {
      const int k = 2 * j + a;
      pz[a] = std::tanh(wv[2 * k] * x[0] + wv[2 * k + 1] * x[1] + bv[k]);
      r[a] = pz[a] * m[j] - tv[k];
    }
    const double norm = std::sqrt(r[0] * r[0] + r[1] * r[1]);
    for (int a = 0; a < 2; ++a) dz[2 * j + a] = (m[j] * r[a] / norm / 3.0) * (1 - pz[a] * pz[a]);
  }
  for (int k = 0; k < 8; ++k) {
    CHECK(B.grad()[k] == doctest::Approx(dz[k]).epsilon(1e-12));
    CHECK(W.grad()[2 * k] == doctest::Approx(dz[k] * x[0]).epsilon(1e-12));
    CHECK(W.grad()[2 * k + 1] == doctest::Approx(dz[k] * x[1]).epsilon(1e-12));
  }
}

TEST_CASE("non-finite values raise a numeric error naming the layer") {
  Tensor x = Tensor::from({1, 2}, {1.0, std::numeric_limits<double>::infinity()});
  const Tensor w = Tensor::from({1, 2}, {1.0, -1.0});
  try {
    ops::linear(x, w, Tensor::zeros({1}), "head");
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK(std::string(e.what()).find("head") != std::string::npos);
  }
}

TEST_CASE("shape mismatches are rejected") {
  const Tensor x = Tensor::zeros({1, 3});
  CHECK_THROWS_AS(ops::linear(x, Tensor::zeros({2, 4}), Tensor::zeros({2}), "dense"), Error);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), Error);
  const CornerRegressor model(std::make_shared<ConvBackbone>(32));
  CHECK_THROWS_AS(model.forward(model.init(1), Tensor::zeros({1, 3, 16, 16})), Error);
}

TEST_CASE("forward: zero parameters give zero output and outputs stay in [-1, 1]") {
  Rng rng(4);
  const CornerRegressor model(std::make_shared<ConvBackbone>(32));
  const Tensor input = random_tensor(rng, {3, 3, 32, 32}, 0, 1, false);
  const Tensor zero_out = model.forward(model.zeros(), input);
  for (double v : zero_out.values()) CHECK(v == 0.0);

  RegressorParams big = model.init(5);
  for (auto& t : big.tensors) {
    for (auto& v : t.tensor.values()) v *= 50;
  }
  const Tensor saturated = model.forward(big, input);
  for (double v : saturated.values()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("forward is deterministic for a fixed seed") {
  Rng rng(5);
  const CornerRegressor model(std::make_shared<ConvBackbone>(32));
  const Tensor input = random_tensor(rng, {2, 3, 32, 32}, 0, 1, false);
  const auto a = model.forward(model.init(9), input);
  const auto b = model.forward(model.init(9), input);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  const auto c = model.forward(model.init(10), input);
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST_CASE("all-invisible targets give parameter gradients below 1e-7") {
  Rng rng(6);
  const CornerRegressor model(std::make_shared<ConvBackbone>(32));
  Batch batch = testing::random_batch(rng, 2, 32);
  // Every corner weighted as invisible with zero target; V stays 1 so the loss is defined.
  batch.targets = Tensor::zeros({2, 8});
  batch.weights = Tensor::from({2, 4}, std::vector<double>(8, kInvisibleCornerWeight));
  batch.visible = {1, 1};
  const auto result = model.loss_and_gradients(model.init(3), batch);
  CHECK(result.loss < 1e-7);
  for (const auto& g : result.gradients) {
    for (double v : g) REQUIRE(std::abs(v) < 1e-7);
  }
}

TEST_CASE("backbone descriptors round trip") {
  const ConvBackbone backbone(64, {8, 16});
  CHECK(backbone.descriptor() == "conv-gap:S=64:8,16");
  const auto parsed = make_backbone(backbone.descriptor());
  CHECK(parsed->descriptor() == backbone.descriptor());
  CHECK(parsed->feature_dim() == 16);
  CHECK_THROWS_AS(make_backbone("resnet101"), Error);
  CHECK_THROWS_AS(make_backbone("conv-gap:S=64:"), Error);
}

TEST_CASE("regressor parameter layout") {
  const CornerRegressor model(std::make_shared<ConvBackbone>());
  const auto params = model.init(1);
  REQUIRE(params.tensors.size() == 10);
  CHECK(params.tensors[0].name == "conv1.kernel");
  CHECK(params.tensors[0].tensor.shape() == Shape{16, 3, 3, 3});
  CHECK(params.tensors[8].name == "head.weight");
  CHECK(params.tensors[8].tensor.shape() == Shape{8, 128});
  CHECK(params.tensors[9].tensor.shape() == Shape{8});
  CHECK(params.all_finite());
  std::size_t expected = 0;
  int in = 3;
  for (int w : {16, 32, 64, 128}) {
    expected += static_cast<std::size_t>(w) * in * 9 + w;
    in = w;
  }
  CHECK(params.parameter_count() == expected + 8 * 128 + 8);
}

TEST_CASE("loss and gradients do not depend on buffer addresses") {
  Rng rng(12);
  const CornerRegressor model(std::make_shared<ConvBackbone>(32, std::vector<int>{4, 8}));
  const auto params = model.init(3);
  for (int n = 1; n <= 6; ++n) {
    const Batch reference = testing::random_batch(rng, n, 32);
    std::vector<double> first;
    for (int shift = 0; shift < 8; ++shift) {
      std::vector<std::vector<double>> spacers(shift);
      for (auto& s : spacers) s.resize(1 + shift);
      const Batch batch{Tensor::from(reference.pixels.shape(),
                                     {reference.pixels.values().begin(), reference.pixels.values().end()}),
                        Tensor::from(reference.targets.shape(),
                                     {reference.targets.values().begin(), reference.targets.values().end()}),
                        Tensor::from(reference.weights.shape(),
                                     {reference.weights.values().begin(), reference.weights.values().end()}),
                        reference.visible};
      const auto step = model.loss_and_gradients(params, batch);
      std::vector<double> all{step.loss};
      for (const auto& g : step.gradients) all.insert(all.end(), g.begin(), g.end());
      if (shift == 0) {
        first = all;
      } else {
        REQUIRE(all == first);
      }
    }
  }
}
