#include "vswno/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

namespace vswno {

namespace {

thread_local Tape* g_active_tape = nullptr;
std::atomic<std::uint64_t> g_next_tape_id{1};

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor() : Tensor(std::make_shared<Impl>()) { impl_->data.assign(1, 0.0); }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  auto impl = std::make_shared<Impl>();
  impl->data.assign(shape_size(shape), value);
  impl->shape = std::move(shape);
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  require(shape_size(shape) == values.size(),
          "Tensor::from: shape " + shape_string(shape) + " does not match " +
              std::to_string(values.size()) + " values");
  auto impl = std::make_shared<Impl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from({}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t = from(std::move(shape), std::move(values));
  t.impl_->requires_grad = true;
  t.impl_->grad.assign(t.impl_->data.size(), 0.0);
  return t;
}

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::size() const { return impl_->data.size(); }
std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
  require(impl_->data.size() == 1, "item() on tensor of shape " + shape_string(impl_->shape));
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
bool Tensor::has_grad() const { return !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }
std::span<double> Tensor::mutable_grad() { return impl_->grad; }

void Tensor::zero_grad() {
  if (impl_->requires_grad) impl_->grad.assign(impl_->data.size(), 0.0);
}

Tensor Tensor::detach() const { return from(impl_->shape, impl_->data); }

bool Tensor::on_tape(const Tape& tape) const { return tape.owns(*impl_); }

// ---------------------------------------------------------------------------
// Tape

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

void Tape::register_leaf(const std::shared_ptr<Tensor::Impl>& leaf) {
  if (std::find(leaves_.begin(), leaves_.end(), leaf) == leaves_.end()) leaves_.push_back(leaf);
}

void Tape::backward(const Tensor& loss) {
  if (nodes_.empty()) throw std::logic_error("backward: tape is empty");
  require(loss.rank() == 0 && loss.size() == 1,
          "backward: loss must be a scalar, got shape " + shape_string(loss.shape()));
  if (!loss.on_tape(*this)) throw std::logic_error("backward: loss was not recorded on this tape");

  for (auto& leaf : leaves_) leaf->grad.assign(leaf->data.size(), 0.0);

  std::vector<std::vector<double>> grads(nodes_.size());
  const auto root = static_cast<std::size_t>(loss.impl_->node);
  grads[root].assign(1, 1.0);

  std::vector<std::span<double>> in_grads;
  for (std::size_t i = root + 1; i-- > 0;) {
    if (grads[i].empty()) continue;
    Node& node = nodes_[i];
    in_grads.assign(node.inputs.size(), {});
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const auto& in = node.inputs[k];
      if (owns(*in)) {
        auto& g = grads[static_cast<std::size_t>(in->node)];
        if (g.empty()) g.assign(in->data.size(), 0.0);
        in_grads[k] = g;
      } else if (in->requires_grad) {
        in_grads[k] = in->grad;
      }
    }
    node.backward(grads[i], in_grads);
    std::vector<double>().swap(grads[i]);
  }
}

void backward(const Tensor& loss, Tape& tape) { tape.backward(loss); }

Tensor record_op(std::string_view tag, std::vector<Tensor> inputs, Shape out_shape,
                 std::vector<double> out_values, BackwardFn backward_fn) {
  require(shape_size(out_shape) == out_values.size(),
          std::string(tag) + ": output shape " + shape_string(out_shape) + " does not match value count");
  auto out = std::make_shared<Tensor::Impl>();
  out->shape = std::move(out_shape);
  out->data = std::move(out_values);

  Tape* tape = g_active_tape;
  if (tape == nullptr) return Tensor(std::move(out));
  const bool needs_grad = std::any_of(inputs.begin(), inputs.end(), [&](const Tensor& t) {
    return t.impl_->requires_grad || tape->owns(*t.impl_);
  });
  if (!needs_grad) return Tensor(std::move(out));

  Tape::Node node;
  node.tag = std::string(tag);
  node.out_size = out->data.size();
  node.backward = std::move(backward_fn);
  for (auto& t : inputs) {
    if (t.impl_->requires_grad) tape->register_leaf(t.impl_);
    node.inputs.push_back(t.impl_);
  }
  out->tape_id = tape->id_;
  out->node = static_cast<std::ptrdiff_t>(tape->nodes_.size());
  tape->nodes_.push_back(std::move(node));
  return Tensor(std::move(out));
}

// ---------------------------------------------------------------------------
// Primitives

Tensor elementwise_binary(const Tensor& a, const Tensor& b, BinaryOp op) {
  const bool broadcast = b.size() == 1 && a.shape() != b.shape();
  require(a.shape() == b.shape() || broadcast,
          "elementwise: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  const auto av = a.data();
  const auto bv = b.data();
  const std::size_t n = av.size();
  std::vector<double> out(n);
  auto bat = [&](std::size_t i) { return broadcast ? bv[0] : bv[i]; };
  switch (op) {
    case BinaryOp::Add:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + bat(i);
      break;
    case BinaryOp::Sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i] - bat(i);
      break;
    case BinaryOp::Mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i] * bat(i);
      break;
  }
  static constexpr const char* kTags[] = {"add", "sub", "mul"};
  return record_op(kTags[static_cast<int>(op)], {a, b}, a.shape(), std::move(out),
                   [a, b, op, broadcast](std::span<const double> g, std::span<const std::span<double>> gi) {
                     const auto av = a.data();
                     const auto bv = b.data();
                     auto& ga = gi[0];
                     auto& gb = gi[1];
                     const std::size_t n = g.size();
                     const double sign_b = op == BinaryOp::Sub ? -1.0 : 1.0;
                     for (std::size_t i = 0; i < n; ++i) {
                       const double bval = broadcast ? bv[0] : bv[i];
                       const double da = op == BinaryOp::Mul ? g[i] * bval : g[i];
                       const double db = op == BinaryOp::Mul ? g[i] * av[i] : sign_b * g[i];
                       if (!ga.empty()) ga[i] += da;
                       if (!gb.empty()) gb[broadcast ? 0 : i] += db;
                     }
                   });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  return record_op("scale", {x}, x.shape(), std::move(out),
                   [factor](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t i = 0; i < g.size(); ++i) gi[0][i] += factor * g[i];
                   });
}

Tensor sqrt(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(x[i]);
  auto saved = out;
  return record_op("sqrt", {x}, x.shape(), std::move(out),
                   [saved = std::move(saved)](std::span<const double> g, std::span<const std::span<double>> gi) {
                     // sqrt has no derivative at 0; use the zero subgradient there.
                     for (std::size_t i = 0; i < g.size(); ++i)
                       if (saved[i] > 0.0) gi[0][i] += g[i] * 0.5 / saved[i];
                   });
}

namespace {

// out[n, cout] = x[n, cin] * w[cin, cout] (+ bias)
void affine_forward(std::span<const double> x, std::span<const double> w, const double* bias, std::size_t rows,
                    std::size_t cin, std::size_t cout, std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* o = out.data() + i * cout;
    if (bias != nullptr) {
      std::copy(bias, bias + cout, o);
    } else {
      std::fill(o, o + cout, 0.0);
    }
    const double* xi = x.data() + i * cin;
    for (std::size_t k = 0; k < cin; ++k) {
      const double xv = xi[k];
      const double* wk = w.data() + k * cout;
      for (std::size_t j = 0; j < cout; ++j) o[j] += xv * wk[j];
    }
  }
}

void affine_backward(std::span<const double> g, std::span<const double> x, std::span<const double> w,
                     std::size_t rows, std::size_t cin, std::size_t cout, std::span<double> gx,
                     std::span<double> gw, std::span<double> gb) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* gr = g.data() + i * cout;
    if (!gb.empty()) {
      for (std::size_t j = 0; j < cout; ++j) gb[j] += gr[j];
    }
    const double* xi = x.data() + i * cin;
    for (std::size_t k = 0; k < cin; ++k) {
      const double* wk = w.data() + k * cout;
      if (!gx.empty()) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cout; ++j) acc += gr[j] * wk[j];
        gx[i * cin + k] += acc;
      }
      if (!gw.empty()) {
        const double xv = xi[k];
        double* gwk = gw.data() + k * cout;
        for (std::size_t j = 0; j < cout; ++j) gwk[j] += xv * gr[j];
      }
    }
  }
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require(x.rank() == 2 && weight.rank() == 2,
          "linear: expected x[n,c_in] and weight[c_in,c_out], got " + shape_string(x.shape()) + " and " +
              shape_string(weight.shape()));
  const std::size_t rows = x.shape()[0];
  const std::size_t cin = x.shape()[1];
  const std::size_t cout = weight.shape()[1];
  require(weight.shape()[0] == cin,
          "linear: inner dimensions differ: " + shape_string(x.shape()) + " x " + shape_string(weight.shape()));
  require(bias.rank() == 1 && bias.shape()[0] == cout,
          "linear: bias shape " + shape_string(bias.shape()) + " does not match c_out=" + std::to_string(cout));
  std::vector<double> out(rows * cout);
  affine_forward(x.data(), weight.data(), bias.data().data(), rows, cin, cout, out);
  return record_op("linear", {x, weight, bias}, {rows, cout}, std::move(out),
                   [x, weight, rows, cin, cout](std::span<const double> g, std::span<const std::span<double>> gi) {
                     affine_backward(g, x.data(), weight.data(), rows, cin, cout, gi[0], gi[1], gi[2]);
                   });
}

Tensor pointwise_conv(const Tensor& x, const Tensor& weight) {
  require(x.rank() >= 1 && weight.rank() == 2, "pointwise_conv: expected x[...,c_in] and weight[c_in,c_out]");
  const std::size_t cin = x.shape().back();
  const std::size_t cout = weight.shape()[1];
  require(weight.shape()[0] == cin, "pointwise_conv: channel mismatch " + shape_string(x.shape()) + " vs weight " +
                                        shape_string(weight.shape()));
  const std::size_t rows = x.size() / cin;
  Shape out_shape = x.shape();
  out_shape.back() = cout;
  std::vector<double> out(rows * cout);
  affine_forward(x.data(), weight.data(), nullptr, rows, cin, cout, out);
  return record_op("pointwise_conv", {x, weight}, std::move(out_shape), std::move(out),
                   [x, weight, rows, cin, cout](std::span<const double> g, std::span<const std::span<double>> gi) {
                     affine_backward(g, x.data(), weight.data(), rows, cin, cout, gi[0], gi[1], {});
                   });
}

Tensor gelu(const Tensor& x) {
  constexpr double kC = 0.044715;
  const double k = std::sqrt(2.0 / M_PI);
  const std::size_t n = x.size();
  std::vector<double> out(n);
  std::vector<double> th(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    th[i] = std::tanh(k * (v + kC * v * v * v));
    out[i] = 0.5 * v * (1.0 + th[i]);
  }
  return record_op("gelu", {x}, x.shape(), std::move(out),
                   [x, th = std::move(th), k](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t i = 0; i < g.size(); ++i) {
                       const double v = x[i];
                       const double t = th[i];
                       const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * k * (1.0 + 3.0 * kC * v * v);
                       gi[0][i] += g[i] * d;
                     }
                   });
}

double spike_surrogate_derivative(double x, double slope) {
  const double s = 1.0 + slope * std::abs(x);
  return 1.0 / (s * s);
}

Tensor spike_threshold(const Tensor& m_minus_t, double slope) {
  if (!(slope > 0.0)) throw std::invalid_argument("spike_threshold: slope must be positive");
  std::vector<double> out(m_minus_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m_minus_t[i] >= 0.0 ? 1.0 : 0.0;
  return record_op("spike_threshold", {m_minus_t}, m_minus_t.shape(), std::move(out),
                   [m_minus_t, slope](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t i = 0; i < g.size(); ++i)
                       gi[0][i] += g[i] * spike_surrogate_derivative(m_minus_t[i], slope);
                   });
}

Tensor reduce(const Tensor& x, ReduceOp op, std::optional<std::size_t> axis) {
  std::size_t outer = 1;
  std::size_t extent = x.size();
  std::size_t inner = 1;
  Shape out_shape;
  if (axis) {
    require(*axis < x.rank(), "reduce: axis " + std::to_string(*axis) + " invalid for shape " + shape_string(x.shape()));
    extent = x.shape()[*axis];
    for (std::size_t d = 0; d < *axis; ++d) outer *= x.shape()[d];
    for (std::size_t d = *axis + 1; d < x.rank(); ++d) inner *= x.shape()[d];
    out_shape = x.shape();
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(*axis));
  }
  const double factor = op == ReduceOp::Mean ? 1.0 / static_cast<double>(extent) : 1.0;
  std::vector<double> out(outer * inner, 0.0);
  const auto xv = x.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t e = 0; e < extent; ++e)
      for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += xv[(o * extent + e) * inner + i];
  if (op == ReduceOp::Mean)
    for (double& v : out) v *= factor;
  return record_op(op == ReduceOp::Mean ? "mean" : "sum", {x}, std::move(out_shape), std::move(out),
                   [outer, extent, inner, factor](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t o = 0; o < outer; ++o)
                       for (std::size_t e = 0; e < extent; ++e)
                         for (std::size_t i = 0; i < inner; ++i)
                           gi[0][(o * extent + e) * inner + i] += factor * g[o * inner + i];
                   });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(shape_size(shape) == x.size(),
          "reshape: cannot view " + shape_string(x.shape()) + " as " + shape_string(shape));
  return record_op("reshape", {x}, std::move(shape), {x.data().begin(), x.data().end()},
                   [](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t i = 0; i < g.size(); ++i) gi[0][i] += g[i];
                   });
}

Tensor stack(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "stack: no tensors");
  const Shape& inner_shape = parts.front().shape();
  const std::size_t inner = parts.front().size();
  std::vector<double> out;
  out.reserve(inner * parts.size());
  for (const auto& p : parts) {
    require(p.shape() == inner_shape,
            "stack: shape mismatch " + shape_string(inner_shape) + " vs " + shape_string(p.shape()));
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner_shape.begin(), inner_shape.end());
  return record_op("stack", parts, std::move(shape), std::move(out),
                   [inner](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t p = 0; p < gi.size(); ++p) {
                       if (gi[p].empty()) continue;
                       for (std::size_t i = 0; i < inner; ++i) gi[p][i] += g[p * inner + i];
                     }
                   });
}

Tensor select(const Tensor& x, std::size_t index) {
  require(x.rank() >= 1 && index < x.shape()[0],
          "select: index " + std::to_string(index) + " out of range for " + shape_string(x.shape()));
  Shape shape(x.shape().begin() + 1, x.shape().end());
  const std::size_t inner = shape_size(shape);
  const auto begin = x.data().begin() + static_cast<std::ptrdiff_t>(index * inner);
  return record_op("select", {x}, std::move(shape), {begin, begin + static_cast<std::ptrdiff_t>(inner)},
                   [index, inner](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t i = 0; i < inner; ++i) gi[0][index * inner + i] += g[i];
                   });
}

Tensor tile(const Tensor& x, std::size_t count) {
  require(count >= 1, "tile: count must be at least 1");
  std::vector<double> out;
  out.reserve(x.size() * count);
  for (std::size_t c = 0; c < count; ++c) out.insert(out.end(), x.data().begin(), x.data().end());
  Shape shape{count};
  shape.insert(shape.end(), x.shape().begin(), x.shape().end());
  const std::size_t inner = x.size();
  return record_op("tile", {x}, std::move(shape), std::move(out),
                   [inner, count](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t c = 0; c < count; ++c)
                       for (std::size_t i = 0; i < inner; ++i) gi[0][i] += g[c * inner + i];
                   });
}

}  // namespace vswno
