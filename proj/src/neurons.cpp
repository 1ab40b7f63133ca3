#include "vswno/neurons.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vswno::neurons {

std::string_view kind_name(NeuronKind kind) {
  switch (kind) {
    case NeuronKind::Artificial:
      return "artificial";
    case NeuronKind::LIF:
      return "lif";
    case NeuronKind::VSN:
      return "vsn";
  }
  return "?";
}

NeuronKind parse_kind(std::string_view name) {
  if (name == "artificial") return NeuronKind::Artificial;
  if (name == "lif") return NeuronKind::LIF;
  if (name == "vsn") return NeuronKind::VSN;
  throw std::invalid_argument("unknown neuron kind '" + std::string(name) + "'");
}

std::string_view activation_name(Activation sigma) { return sigma == Activation::GeLU ? "gelu" : "identity"; }

Activation parse_activation(std::string_view name) {
  if (name == "gelu") return Activation::GeLU;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Tensor apply_activation(Activation sigma, const Tensor& z) { return sigma == Activation::GeLU ? gelu(z) : z; }

// ---------------------------------------------------------------------------

NeuronLayer::NeuronLayer(NeuronKind kind, Activation sigma, Shape shape, bool trainable, Rng& rng)
    : kind_(kind), sigma_(sigma), shape_(std::move(shape)), trainable_(trainable) {
  if (spiking()) {
    const std::size_t n = shape_size(shape_);
    std::vector<double> beta(n), threshold(n);
    for (auto& b : beta) b = rng.uniform();
    for (auto& t : threshold) t = rng.uniform();
    beta_ = trainable_ ? Tensor::parameter(shape_, std::move(beta)) : Tensor::from(shape_, std::move(beta));
    threshold_ =
        trainable_ ? Tensor::parameter(shape_, std::move(threshold)) : Tensor::from(shape_, std::move(threshold));
  }
  reset_state();
}

NeuronLayer::NeuronLayer(NeuronKind kind, Activation sigma, Shape shape, bool trainable, std::vector<double> beta,
                         std::vector<double> threshold)
    : kind_(kind), sigma_(sigma), shape_(std::move(shape)), trainable_(trainable) {
  if (spiking()) {
    beta_ = trainable_ ? Tensor::parameter(shape_, std::move(beta)) : Tensor::from(shape_, std::move(beta));
    threshold_ =
        trainable_ ? Tensor::parameter(shape_, std::move(threshold)) : Tensor::from(shape_, std::move(threshold));
  }
  reset_state();
}

void NeuronLayer::reset_state() {
  membrane_ = Tensor::zeros(shape_);
  counter_ = {};
  steps_ = 0;
  indicators_.clear();
}

Tensor NeuronLayer::step(const Tensor& z) {
  switch (kind_) {
    case NeuronKind::LIF:
      return lif_step(z);
    case NeuronKind::VSN:
      return vsn_step(z);
    case NeuronKind::Artificial:
      break;
  }
  return artificial_apply(z);
}

Tensor NeuronLayer::integrate_and_fire(const Tensor& z) {
  if (z.shape() != shape_) {
    throw ShapeError("neuron layer: input shape " + shape_string(z.shape()) + " does not match membrane " +
                     shape_string(shape_));
  }
  const Tensor m = add(mul(membrane_, beta_), z);
  const Tensor spikes = spike_threshold(sub(m, threshold_), slope_);

  // Reset to zero where a spike fired; the indicator is detached here.
  std::vector<double> keep(spikes.size());
  std::uint64_t fired = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const bool s = spikes[i] != 0.0;
    keep[i] = s ? 0.0 : 1.0;
    fired += s ? 1 : 0;
  }
  membrane_ = mul(m, Tensor::from(shape_, std::move(keep)));

  counter_.spikes += fired;
  counter_.possible += spikes.size();
  ++steps_;
  indicators_.push_back(spikes);
  return spikes;
}

Tensor NeuronLayer::lif_step(const Tensor& z) {
  if (kind_ != NeuronKind::LIF) throw std::logic_error("lif_step on a non-LIF layer");
  return integrate_and_fire(z);
}

Tensor NeuronLayer::vsn_step(const Tensor& z) {
  if (kind_ != NeuronKind::VSN) throw std::logic_error("vsn_step on a non-VSN layer");
  const Tensor gate = integrate_and_fire(z);
  return apply_activation(sigma_, mul(z, gate));
}

Tensor NeuronLayer::artificial_apply(const Tensor& z) const {
  if (kind_ != NeuronKind::Artificial) throw std::logic_error("artificial_apply on a spiking layer");
  return apply_activation(sigma_, z);
}

Tensor NeuronLayer::soft_spike_fraction() const {
  if (indicators_.empty()) return Tensor::scalar(0.0);
  if (indicators_.size() == 1) return mean(indicators_.front());
  return mean(stack(indicators_));
}

std::vector<Tensor> NeuronLayer::parameters() const {
  if (!spiking() || !trainable_) return {};
  return {beta_, threshold_};
}

// ---------------------------------------------------------------------------
// Encoders

std::string_view encoding_name(Encoding e) {
  switch (e) {
    case Encoding::Direct:
      return "direct";
    case Encoding::Rate:
      return "rate";
    case Encoding::Triangular:
      return "triangular";
  }
  return "?";
}

Encoding parse_encoding(std::string_view name) {
  if (name == "direct") return Encoding::Direct;
  if (name == "rate") return Encoding::Rate;
  if (name == "triangular") return Encoding::Triangular;
  throw std::invalid_argument("unknown encoding '" + std::string(name) + "'");
}

namespace {

void check_encoding_args(std::size_t sts, EncodingRange range) {
  if (sts < 1) throw std::invalid_argument("encoding needs at least one spike time step");
  if (!(range.hi > range.lo)) throw std::invalid_argument("encoding range requires hi > lo");
}

double normalised(double x, EncodingRange range) { return std::clamp((x - range.lo) / (range.hi - range.lo), 0.0, 1.0); }

}  // namespace

SpikeTrain encode_direct(const Tensor& x, std::size_t sts) {
  if (sts < 1) throw std::invalid_argument("encoding needs at least one spike time step");
  return {tile(x, sts), sts};
}

SpikeTrain encode_rate(const Tensor& x, std::size_t sts, std::uint64_t seed, EncodingRange range) {
  check_encoding_args(sts, range);
  const std::size_t n = x.size();
  std::vector<double> out(n * sts);
  for (std::size_t t = 0; t < sts; ++t)
    for (std::size_t i = 0; i < n; ++i)
      out[t * n + i] = counter_uniform(seed, i, t) < normalised(x[i], range) ? 1.0 : 0.0;
  Shape shape{sts};
  shape.insert(shape.end(), x.shape().begin(), x.shape().end());
  return {Tensor::from(std::move(shape), std::move(out)), sts};
}

SpikeTrain encode_triangular(const Tensor& x, std::size_t sts, EncodingRange range) {
  check_encoding_args(sts, range);
  const std::size_t n = x.size();
  std::vector<double> out(n * sts, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(std::lround(normalised(x[i], range) * static_cast<double>(sts)));
    for (std::size_t t = 0; t < k; ++t) out[t * n + i] = 1.0;
  }
  Shape shape{sts};
  shape.insert(shape.end(), x.shape().begin(), x.shape().end());
  return {Tensor::from(std::move(shape), std::move(out)), sts};
}

}  // namespace vswno::neurons
