#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lightcorners {

using Shape = std::vector<int>;

std::size_t element_count(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

// Dense row-major double tensor that records the operations producing it, so
// that gradients of a scalar result can be pulled back by `backward`.
//
// Tensors are handles: copies share storage and graph position. Values of a
// leaf may be edited in place between graph constructions (optimizer steps).
class Tensor {
 public:
  struct Node;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  int dim(std::size_t axis) const { return shape().at(axis); }
  std::size_t size() const;
  bool requires_grad() const;

  std::span<double> values();
  std::span<const double> values() const;
  // Zero-length until a gradient has flowed into this tensor.
  std::span<const double> grad() const;
  void zero_grad();

  // Fresh leaf holding a copy of the values.
  Tensor detach() const;

  Node* node() const noexcept { return node_.get(); }

  // Internal: builds a result node. `backward` receives the node and must
  // accumulate into each parent's gradient buffer.
  static Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents, std::string op,
                            std::function<void(Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

struct Tensor::Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until touched
  std::vector<Tensor> parents;
  std::function<void(Node&)> backward_fn;
  std::string op;
  bool requires_grad = false;

  std::vector<double>& grad_buffer();  // allocates zeros on first use
};

// Reverse-mode sweep from a single-element tensor (seed gradient 1).
void backward(const Tensor& scalar);

namespace ops {

// input [N, C, H, W], kernel [O, C, K, K], bias [O] -> [N, O, Ho, Wo]
// with Ho = (H + 2*pad - K) / stride + 1.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride, int pad,
              const std::string& name);

Tensor tanh(const Tensor& x, const std::string& name);

// [N, C, H, W] -> [N, C]
Tensor global_avg_pool(const Tensor& x, const std::string& name);

// x [N, K], weight [O, K], bias [O] -> [N, O]
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias, const std::string& name);

// Masked corner regression loss over a batch:
//   (1/N) sum_i (1/V_i) sum_j || p_ij * M_ij - t_ij ||_2
// predictions/targets [N, 8], weights [N, 4] holding M_ij (1 visible, 1e-8
// invisible), visible [N] holding V_i. Returns a [1] tensor. The subgradient
// at a zero residual is taken as 0.
Tensor masked_corner_loss(const Tensor& predictions, const Tensor& targets, const Tensor& weights,
                          const std::vector<int>& visible);

}  // namespace ops
}  // namespace lightcorners
