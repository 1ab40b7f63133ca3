#pragma once

// Reverse-mode automatic differentiation over dense row-major float64 arrays.
//
// A Tensor is a cheap handle onto shared storage. Operations record onto the
// thread's active Tape (see TapeScope) whenever one of their inputs needs a
// gradient; otherwise they only compute forward values.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vswno {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Tape;

class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);
  /// Leaf with requires_grad set; its grad buffer is allocated eagerly.
  static Tensor parameter(Shape shape, std::vector<double> values);

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::span<const double> data() const;
  /// Direct write access. Only for leaves (initialisation, optimiser steps).
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Same values, no history, no gradient.
  Tensor detach() const;
  /// True when this tensor is the output of a node on `tape`.
  bool on_tape(const Tape& tape) const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Tape;
  friend Tensor record_op(std::string_view, std::vector<Tensor>, Shape, std::vector<double>,
                          std::function<void(std::span<const double>, std::span<const std::span<double>>)>);

  struct Impl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    std::uint64_t tape_id = 0;
    std::ptrdiff_t node = -1;
  };
  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;
};

/// Backward rule: receives d(loss)/d(output) and one span per input. An input
/// that needs no gradient gets an empty span. Rules must accumulate (+=).
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<const std::span<double>> grad_in)>;

/// Ordered record of differentiable operations. Nodes are appended in
/// execution order, which is therefore a topological order.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::string_view tag(std::size_t node) const { return nodes_.at(node).tag; }

  /// Overwrites the grad of every requires_grad leaf recorded on this tape
  /// with d(loss)/d(leaf). Leaves that the loss does not reach get zeros.
  void backward(const Tensor& loss);

 private:
  friend Tensor record_op(std::string_view, std::vector<Tensor>, Shape, std::vector<double>, BackwardFn);

  struct Node {
    std::string tag;
    std::vector<std::shared_ptr<Tensor::Impl>> inputs;
    std::size_t out_size = 0;
    BackwardFn backward;
  };

  void register_leaf(const std::shared_ptr<Tensor::Impl>& leaf);
  bool owns(const Tensor::Impl& impl) const { return impl.tape_id == id_ && impl.node >= 0; }
  friend class Tensor;

  std::uint64_t id_;
  std::vector<Node> nodes_;
  std::vector<std::shared_ptr<Tensor::Impl>> leaves_;
};

/// Makes `tape` the active tape of the calling thread for the scope lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

void backward(const Tensor& loss, Tape& tape);

/// Extension point for module-specific primitives. Computes nothing itself:
/// the caller supplies forward values and the backward rule. Records a node
/// when a tape is active and any input needs a gradient.
Tensor record_op(std::string_view tag, std::vector<Tensor> inputs, Shape out_shape,
                 std::vector<double> out_values, BackwardFn backward);

enum class BinaryOp { Add, Sub, Mul };
enum class ReduceOp { Sum, Mean };

/// `b` must have the shape of `a` or be a single element (scalar broadcast).
Tensor elementwise_binary(const Tensor& a, const Tensor& b, BinaryOp op);
inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise_binary(a, b, BinaryOp::Add); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise_binary(a, b, BinaryOp::Sub); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise_binary(a, b, BinaryOp::Mul); }
Tensor scale(const Tensor& x, double factor);
Tensor sqrt(const Tensor& x);

/// x[n, c_in] * weight[c_in, c_out] + bias[c_out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// 1x1 convolution: channel mixing along the last axis at every grid point.
Tensor pointwise_conv(const Tensor& x, const Tensor& weight);

/// Tanh form: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& x);

/// Heaviside step at 0 (inclusive) forward; fast-sigmoid derivative
/// 1 / (1 + slope |x|)^2 backward.
Tensor spike_threshold(const Tensor& m_minus_t, double slope = 25.0);
double spike_surrogate_derivative(double x, double slope = 25.0);

Tensor reduce(const Tensor& x, ReduceOp op, std::optional<std::size_t> axis = std::nullopt);
inline Tensor sum(const Tensor& x) { return reduce(x, ReduceOp::Sum); }
inline Tensor mean(const Tensor& x) { return reduce(x, ReduceOp::Mean); }

Tensor reshape(const Tensor& x, Shape shape);
/// Stacks equally shaped tensors along a new leading axis.
Tensor stack(const std::vector<Tensor>& parts);
/// Slice `index` of the leading axis.
Tensor select(const Tensor& x, std::size_t index);
/// Repeats x `count` times along a new leading axis.
Tensor tile(const Tensor& x, std::size_t count);

}  // namespace vswno
