#include "lightcorners/tensor.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "lightcorners/errors.hpp"

namespace lightcorners {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

void check_finite(std::span<const double> values, const std::string& what, const std::string& layer) {
  const Eigen::Map<const Eigen::ArrayXd> all(values.data(), static_cast<Eigen::Index>(values.size()));
  if (!all.allFinite()) fail(ErrorKind::Numeric, "non-finite " + what + " in layer '" + layer + "'");
}

// Products land in aligned scratch first: Eigen's small-product kernels peel
// by destination address, which would make results depend on heap layout.
template <typename Product>
void store_product(MatrixMap dst, const Product& product, RowMatrix& scratch, bool accumulate) {
  scratch.noalias() = product;
  if (accumulate) {
    dst += scratch;
  } else {
    dst = scratch;
  }
}

bool any_requires_grad(std::initializer_list<const Tensor*> tensors) {
  for (const auto* t : tensors) {
    if (t->requires_grad()) return true;
  }
  return false;
}

void require_rank(const Tensor& t, std::size_t rank, const std::string& layer) {
  require(t.defined() && t.shape().size() == rank, ErrorKind::InvalidInput,
          "layer '" + layer + "' expects a rank-" + std::to_string(rank) + " tensor, got " +
              (t.defined() ? to_string(t.shape()) : std::string("undefined")));
}

}  // namespace

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? ", " : "") << shape[i];
  out << ']';
  return out.str();
}

std::vector<double>& Tensor::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = element_count(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  require(element_count(shape) == values.size(), ErrorKind::InvalidInput,
          "value count " + std::to_string(values.size()) + " does not match shape " + to_string(shape));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->op = "leaf";
  return Tensor(std::move(node));
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents, std::string op,
                           std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->op = std::move(op);
  for (const auto& p : parents) node->requires_grad = node->requires_grad || p.requires_grad();
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward);
  }
  check_finite(node->value, "output", node->op);
  return Tensor(std::move(node));
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->value.size(); }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
std::span<double> Tensor::values() { return node_->value; }
std::span<const double> Tensor::values() const { return node_->value; }
std::span<const double> Tensor::grad() const { return node_->grad; }
void Tensor::zero_grad() { node_->grad.clear(); }

Tensor Tensor::detach() const { return from(node_->shape, node_->value, node_->requires_grad); }

void backward(const Tensor& scalar) {
  require(scalar.defined() && scalar.size() == 1, ErrorKind::InvalidInput, "backward needs a single-element tensor");
  if (!scalar.requires_grad()) return;

  // Iterative post-order DFS gives a topological order of the graph.
  std::vector<Tensor::Node*> order;
  std::unordered_set<Tensor::Node*> seen;
  std::vector<std::pair<Tensor::Node*, std::size_t>> stack{{scalar.node(), 0}};
  seen.insert(scalar.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Tensor::Node* parent = node->parents[next++].node();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  scalar.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Tensor::Node* node = *it;
    if (!node->backward_fn || node->grad.empty()) continue;
    node->backward_fn(*node);
    for (const auto& parent : node->parents) {
      if (parent.requires_grad()) check_finite(parent.grad(), "gradient", node->op);
    }
  }
}

namespace {

// Output columns [lo, hi) whose input column ox * stride - pad + offset is in [0, extent).
std::pair<int, int> valid_range(int out_extent, int in_extent, int stride, int pad, int offset) {
  int lo = 0;
  while (lo < out_extent && lo * stride - pad + offset < 0) ++lo;
  int hi = out_extent;
  while (hi > lo && (hi - 1) * stride - pad + offset >= in_extent) --hi;
  return {lo, hi};
}

struct ConvGeometry {
  int c, h, w, k, stride, pad, ho, wo;
  int plane() const { return ho * wo; }
  int rows() const { return c * k * k; }
};

// One image: patches [C*K*K, Ho*Wo] from input [C, H, W].
void im2col(const ConvGeometry& g, const double* src, double* dst) {
  for (int ch = 0; ch < g.c; ++ch) {
    for (int ky = 0; ky < g.k; ++ky) {
      const auto [oy_lo, oy_hi] = valid_range(g.ho, g.h, g.stride, g.pad, ky);
      for (int kx = 0; kx < g.k; ++kx) {
        const auto [ox_lo, ox_hi] = valid_range(g.wo, g.w, g.stride, g.pad, kx);
        double* row = dst + static_cast<std::size_t>((ch * g.k + ky) * g.k + kx) * g.plane();
        std::fill(row, row + oy_lo * g.wo, 0.0);
        for (int oy = oy_lo; oy < oy_hi; ++oy) {
          const double* in = src + (static_cast<std::size_t>(ch) * g.h + oy * g.stride - g.pad + ky) * g.w - g.pad + kx;
          double* out = row + oy * g.wo;
          std::fill(out, out + ox_lo, 0.0);
          for (int ox = ox_lo; ox < ox_hi; ++ox) out[ox] = in[ox * g.stride];
          std::fill(out + ox_hi, out + g.wo, 0.0);
        }
        std::fill(row + oy_hi * g.wo, row + g.plane(), 0.0);
      }
    }
  }
}

// Adjoint of im2col: accumulates patch gradients into the input gradient.
void col2im(const ConvGeometry& g, const double* src, double* dst) {
  for (int ch = 0; ch < g.c; ++ch) {
    for (int ky = 0; ky < g.k; ++ky) {
      const auto [oy_lo, oy_hi] = valid_range(g.ho, g.h, g.stride, g.pad, ky);
      for (int kx = 0; kx < g.k; ++kx) {
        const auto [ox_lo, ox_hi] = valid_range(g.wo, g.w, g.stride, g.pad, kx);
        const double* row = src + static_cast<std::size_t>((ch * g.k + ky) * g.k + kx) * g.plane();
        for (int oy = oy_lo; oy < oy_hi; ++oy) {
          double* out = dst + (static_cast<std::size_t>(ch) * g.h + oy * g.stride - g.pad + ky) * g.w - g.pad + kx;
          const double* in = row + oy * g.wo;
          for (int ox = ox_lo; ox < ox_hi; ++ox) out[ox * g.stride] += in[ox];
        }
      }
    }
  }
}

}  // namespace

namespace ops {

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride, int pad,
              const std::string& name) {
  require_rank(input, 4, name);
  require_rank(kernel, 4, name);
  require_rank(bias, 1, name);
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int o = kernel.dim(0), k = kernel.dim(2);
  require(kernel.dim(1) == c && kernel.dim(3) == k && bias.dim(0) == o, ErrorKind::InvalidInput,
          "layer '" + name + "': kernel " + to_string(kernel.shape()) + " incompatible with input " +
              to_string(input.shape()));
  require(stride >= 1 && pad >= 0 && pad < k && h + 2 * pad >= k && w + 2 * pad >= k, ErrorKind::InvalidInput,
          "layer '" + name + "': invalid stride/padding for input " + to_string(input.shape()));
  const ConvGeometry g{c, h, w, k, stride, pad, (h + 2 * pad - k) / stride + 1, (w + 2 * pad - k) / stride + 1};
  const int plane = g.plane();
  const int rows = g.rows();
  const std::size_t patch_size = static_cast<std::size_t>(rows) * plane;
  const std::size_t in_size = static_cast<std::size_t>(c) * h * w;
  const std::size_t out_size = static_cast<std::size_t>(o) * plane;

  // Patches of every image, kept for the backward pass.
  std::shared_ptr<double[]> patches(new double[n * patch_size]);  // fully written by im2col
  std::vector<double> out(n * out_size);
  const ConstMatrixMap weights(kernel.values().data(), o, rows);
  const auto b = bias.values();
  RowMatrix scratch;
  for (int img = 0; img < n; ++img) {
    double* cols = patches.get() + img * patch_size;
    im2col(g, input.values().data() + img * in_size, cols);
    MatrixMap y(out.data() + img * out_size, o, plane);
    store_product(y, weights * ConstMatrixMap(cols, rows, plane), scratch, false);
    for (int oc = 0; oc < o; ++oc) y.row(oc).array() += b[oc];
  }

  if (!any_requires_grad({&input, &kernel, &bias})) patches.reset();
  return Tensor::make_result(
      {n, o, g.ho, g.wo}, std::move(out), {input, kernel, bias}, name,
      [=](Tensor::Node& self) {
        auto& in_node = *self.parents[0].node();
        auto& k_node = *self.parents[1].node();
        auto& b_node = *self.parents[2].node();
        const ConstMatrixMap weights(k_node.value.data(), o, rows);
        RowMatrix dcols(rows, plane), scratch;
        for (int img = 0; img < n; ++img) {
          const ConstMatrixMap dy(self.grad.data() + img * out_size, o, plane);
          const ConstMatrixMap cols(patches.get() + img * patch_size, rows, plane);
          if (k_node.requires_grad) {
            store_product(MatrixMap(k_node.grad_buffer().data(), o, rows), dy * cols.transpose(), scratch, true);
          }
          if (b_node.requires_grad) {
            auto& gb = b_node.grad_buffer();
            for (int oc = 0; oc < o; ++oc) {
              const double* row = self.grad.data() + img * out_size + static_cast<std::size_t>(oc) * plane;
              gb[oc] += std::accumulate(row, row + plane, 0.0);
            }
          }
          if (in_node.requires_grad) {
            dcols.noalias() = weights.transpose() * dy;
            col2im(g, dcols.data(), in_node.grad_buffer().data() + img * in_size);
          }
        }
      });
}

Tensor tanh(const Tensor& x, const std::string& name) {
  require(x.defined(), ErrorKind::InvalidInput, "layer '" + name + "': undefined input");
  std::vector<double> out(x.size());
  const auto in = Eigen::Map<const Eigen::ArrayXd>(x.values().data(), static_cast<Eigen::Index>(x.size()));
  // tanh(x) = sign(x) (1 - e) / (1 + e) with e = exp(-2|x|); vectorizes, unlike std::tanh
  const Eigen::ArrayXd e = (-2.0 * in.abs()).exp();
  Eigen::Map<Eigen::ArrayXd>(out.data(), static_cast<Eigen::Index>(out.size())) = in.sign() * (1.0 - e) / (1.0 + e);
  return Tensor::make_result(x.shape(), std::move(out), {x}, name, [](Tensor::Node& self) {
    auto& gin = self.parents[0].node()->grad_buffer();
    const auto n = static_cast<Eigen::Index>(gin.size());
    const Eigen::Map<const Eigen::ArrayXd> y(self.value.data(), n);
    Eigen::Map<Eigen::ArrayXd>(gin.data(), n) += Eigen::Map<const Eigen::ArrayXd>(self.grad.data(), n) * (1.0 - y.square());
  });
}

Tensor global_avg_pool(const Tensor& x, const std::string& name) {
  require_rank(x, 4, name);
  const int n = x.dim(0), c = x.dim(1);
  const int plane = x.dim(2) * x.dim(3);
  std::vector<double> out(static_cast<std::size_t>(n) * c);
  const auto in = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* src = in.data() + i * plane;
    out[i] = std::accumulate(src, src + plane, 0.0) / plane;
  }
  return Tensor::make_result({n, c}, std::move(out), {x}, name, [plane](Tensor::Node& self) {
    auto& gin = self.parents[0].node()->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double g = self.grad[i] / plane;
      double* dst = gin.data() + i * plane;
      for (int p = 0; p < plane; ++p) dst[p] += g;
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias, const std::string& name) {
  require_rank(x, 2, name);
  require_rank(weight, 2, name);
  require_rank(bias, 1, name);
  const int n = x.dim(0), k = x.dim(1), o = weight.dim(0);
  require(weight.dim(1) == k && bias.dim(0) == o, ErrorKind::InvalidInput,
          "layer '" + name + "': weight " + to_string(weight.shape()) + " incompatible with input " +
              to_string(x.shape()));
  std::vector<double> out(static_cast<std::size_t>(n) * o);
  MatrixMap y(out.data(), n, o);
  RowMatrix scratch;
  store_product(y, ConstMatrixMap(x.values().data(), n, k) * ConstMatrixMap(weight.values().data(), o, k).transpose(),
                scratch, false);
  const auto b = bias.values();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < o; ++j) y(i, j) += b[j];
  }
  return Tensor::make_result({n, o}, std::move(out), {x, weight, bias}, name, [n, k, o](Tensor::Node& self) {
    auto& x_node = *self.parents[0].node();
    auto& w_node = *self.parents[1].node();
    auto& b_node = *self.parents[2].node();
    const ConstMatrixMap dy(self.grad.data(), n, o);
    RowMatrix scratch;
    if (x_node.requires_grad) {
      store_product(MatrixMap(x_node.grad_buffer().data(), n, k), dy * ConstMatrixMap(w_node.value.data(), o, k),
                    scratch, true);
    }
    if (w_node.requires_grad) {
      store_product(MatrixMap(w_node.grad_buffer().data(), o, k), dy.transpose() * ConstMatrixMap(x_node.value.data(), n, k),
                    scratch, true);
    }
    if (b_node.requires_grad) {
      auto& gb = b_node.grad_buffer();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < o; ++j) gb[j] += dy(i, j);
      }
    }
  });
}

Tensor masked_corner_loss(const Tensor& predictions, const Tensor& targets, const Tensor& weights,
                          const std::vector<int>& visible) {
  const std::string name = "masked_corner_loss";
  require_rank(predictions, 2, name);
  const int n = predictions.dim(0);
  require(n > 0 && predictions.dim(1) == 8, ErrorKind::InvalidInput, "predictions must be [N, 8] with N > 0");
  require(targets.defined() && targets.shape() == predictions.shape(), ErrorKind::InvalidInput,
          "targets must match the prediction shape");
  require(weights.defined() && weights.shape() == Shape{n, 4}, ErrorKind::InvalidInput, "mask weights must be [N, 4]");
  require(static_cast<int>(visible.size()) == n, ErrorKind::InvalidInput, "one visible count per example required");
  require(!targets.requires_grad() && !weights.requires_grad(), ErrorKind::InvalidInput,
          "targets and mask weights are constants");
  for (int v : visible) require(v >= 1, ErrorKind::InvalidInput, "every example needs V_i >= 1");

  const auto p = predictions.values();
  const auto t = targets.values();
  const auto m = weights.values();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double example = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double rx = p[8 * i + 2 * j] * m[4 * i + j] - t[8 * i + 2 * j];
      const double ry = p[8 * i + 2 * j + 1] * m[4 * i + j] - t[8 * i + 2 * j + 1];
      example += std::hypot(rx, ry);
    }
    total += example / visible[i];
  }
  return Tensor::make_result({1}, {total / n}, {predictions, targets, weights}, name,
                             [n, visible](Tensor::Node& self) {
                               const auto& pv = self.parents[0].node()->value;
                               const auto& tv = self.parents[1].node()->value;
                               const auto& mv = self.parents[2].node()->value;
                               auto& gp = self.parents[0].node()->grad_buffer();
                               const double seed = self.grad[0] / n;
                               for (int i = 0; i < n; ++i) {
                                 for (int j = 0; j < 4; ++j) {
                                   const double w = mv[4 * i + j];
                                   const double rx = pv[8 * i + 2 * j] * w - tv[8 * i + 2 * j];
                                   const double ry = pv[8 * i + 2 * j + 1] * w - tv[8 * i + 2 * j + 1];
                                   const double norm = std::hypot(rx, ry);
                                   if (norm == 0.0) continue;
                                   const double scale = seed / visible[i] * w / norm;
                                   gp[8 * i + 2 * j] += scale * rx;
                                   gp[8 * i + 2 * j + 1] += scale * ry;
                                 }
                               }
                             });
}

}  // namespace ops
}  // namespace lightcorners
