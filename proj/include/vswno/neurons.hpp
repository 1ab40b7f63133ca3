#pragma once

// Activation-site neuron layers (artificial, leaky integrate-and-fire,
// variable spiking) and input-to-spike-train encoders.

#include <cstdint>
#include <string_view>
#include <vector>

#include "vswno/random.hpp"
#include "vswno/tensor.hpp"

namespace vswno::neurons {

enum class NeuronKind { Artificial, LIF, VSN };
enum class Activation { Identity, GeLU };

std::string_view kind_name(NeuronKind kind);
NeuronKind parse_kind(std::string_view name);
std::string_view activation_name(Activation sigma);
Activation parse_activation(std::string_view name);

Tensor apply_activation(Activation sigma, const Tensor& z);

struct SpikeCounter {
  std::uint64_t spikes = 0;
  std::uint64_t possible = 0;

  SpikeCounter& operator+=(const SpikeCounter& o) {
    spikes += o.spikes;
    possible += o.possible;
    return *this;
  }
};

/// One activation site. Membrane state, per-pass spike counts and the spike
/// indicators of the current pass live here; reset_state() clears all three.
///
/// Copies share parameter storage but not the membrane: give each thread its
/// own copy when evaluating concurrently.
class NeuronLayer {
 public:
  static constexpr double kDefaultSlope = 25.0;

  NeuronLayer() = default;
  /// Leakage and threshold are drawn per element from U[0, 1].
  NeuronLayer(NeuronKind kind, Activation sigma, Shape shape, bool trainable, Rng& rng);
  /// Explicit leakage/threshold, mainly for tests.
  NeuronLayer(NeuronKind kind, Activation sigma, Shape shape, bool trainable, std::vector<double> beta,
              std::vector<double> threshold);

  NeuronKind kind() const { return kind_; }
  Activation sigma() const { return sigma_; }
  const Shape& shape() const { return shape_; }
  bool trainable() const { return trainable_; }
  bool spiking() const { return kind_ != NeuronKind::Artificial; }

  const Tensor& beta() const { return beta_; }
  const Tensor& threshold() const { return threshold_; }
  Tensor& beta() { return beta_; }
  Tensor& threshold() { return threshold_; }
  const Tensor& membrane() const { return membrane_; }

  double slope() const { return slope_; }
  void set_slope(double slope) { slope_ = slope; }

  /// Dispatches on kind.
  Tensor step(const Tensor& z);
  Tensor lif_step(const Tensor& z);
  Tensor vsn_step(const Tensor& z);
  Tensor artificial_apply(const Tensor& z) const;

  void reset_state();

  const SpikeCounter& spike_counter() const { return counter_; }
  std::size_t steps_elapsed() const { return steps_; }
  /// Binary spike indicators of each step since the last reset. They carry the
  /// surrogate gradient, so their mean is a differentiable spike fraction.
  const std::vector<Tensor>& spike_indicators() const { return indicators_; }
  /// Mean of all recorded indicators (S / 100 as a tensor); zero when none.
  Tensor soft_spike_fraction() const;

  /// Trainable leakage and threshold tensors (empty when fixed or artificial).
  std::vector<Tensor> parameters() const;

 private:
  Tensor integrate_and_fire(const Tensor& z);

  NeuronKind kind_ = NeuronKind::Artificial;
  Activation sigma_ = Activation::GeLU;
  Shape shape_;
  bool trainable_ = false;
  double slope_ = kDefaultSlope;
  Tensor beta_;
  Tensor threshold_;
  Tensor membrane_;
  SpikeCounter counter_;
  std::size_t steps_ = 0;
  std::vector<Tensor> indicators_;
};

/// Input repeated for every spike time step.
struct SpikeTrain {
  Tensor values;  // [sts, ...]
  std::size_t sts = 0;

  Tensor step(std::size_t t) const { return select(values, t); }
};

struct EncodingRange {
  double lo = 0.0;
  double hi = 1.0;
};

enum class Encoding { Direct, Rate, Triangular };
std::string_view encoding_name(Encoding e);
Encoding parse_encoding(std::string_view name);

SpikeTrain encode_direct(const Tensor& x, std::size_t sts);
/// Bernoulli spikes with p = clip((x - lo) / (hi - lo), 0, 1); the draw for
/// (element i, step t) depends only on (seed, i, t).
SpikeTrain encode_rate(const Tensor& x, std::size_t sts, std::uint64_t seed, EncodingRange range = {});
/// First round(p * sts) steps fire, the rest are silent.
SpikeTrain encode_triangular(const Tensor& x, std::size_t sts, EncodingRange range = {});

}  // namespace vswno::neurons
