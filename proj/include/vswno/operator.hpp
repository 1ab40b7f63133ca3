#pragma once

// Wavelet neural operator with configurable activation sites.
//
// Layout of one forward pass (one spike time step):
//   input [grid..., c]  -> append normalised coordinates -> lift (linear)
//   -> L update blocks, sites A_1..A_{L-1} after blocks 1..L-1
//   -> projection layer 1 -> site A_L -> (mean over time steps) -> projection layer 2
// Internally fields are flattened to [points, channels].

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vswno/neurons.hpp"
#include "vswno/tensor.hpp"
#include "vswno/wavelet.hpp"

namespace vswno::wno {

using neurons::Activation;
using neurons::Encoding;
using neurons::NeuronKind;
using wavelet::ExtensionMode;

struct WnoConfig {
  std::vector<std::size_t> grid;   // {n} or {rows, cols}
  std::size_t in_channels = 1;     // field channels before coordinates are appended
  std::size_t width = 64;          // d_u
  std::size_t hidden = 128;        // width of the first projection layer
  std::size_t blocks = 4;          // L
  std::string wavelet = "db6";
  std::size_t levels = 8;          // m
  ExtensionMode mode = ExtensionMode::Symmetric;
  NeuronKind neuron = NeuronKind::Artificial;
  Activation sigma = Activation::GeLU;
  std::size_t sts = 1;
  Encoding encoding = Encoding::Direct;
  bool trainable_neurons = true;
  double surrogate_slope = 25.0;

  std::size_t lifted_channels() const { return in_channels + grid.size(); }  // d_a
  std::size_t points() const;
  /// Throws std::invalid_argument on any inconsistent field.
  void validate() const;
};

/// Appends coordinates in [0, 1] for every spatial axis as trailing channels.
Tensor append_grid(const Tensor& sample);

/// Retained wavelet bands of one update block: the coarsest approximation and
/// the coarsest detail band(s). Finer details are discarded.
class SpectralPlan {
 public:
  SpectralPlan() = default;
  SpectralPlan(std::vector<std::size_t> grid, const std::string& wavelet, std::size_t levels, ExtensionMode mode);

  const std::vector<std::size_t>& grid() const { return grid_; }
  std::size_t points() const;
  std::size_t levels() const { return levels_; }
  ExtensionMode mode() const { return mode_; }
  const wavelet::WaveletFilter& filter() const { return *filter_; }
  /// Extent of one retained band along each axis.
  const std::vector<std::size_t>& band_shape() const { return band_shape_; }
  std::size_t band_size() const;
  std::size_t band_count() const { return grid_.size() == 1 ? 2 : 4; }
  std::size_t coefficient_count() const { return band_size() * band_count(); }
  /// Per-axis input extents of every level (ledger).
  const std::vector<std::vector<std::size_t>>& extents() const { return extents_; }

  /// Coefficients of one channel, bands concatenated: 1D [a_m, d_m], 2D [LL, LH, HL, HH].
  void analyze(std::span<const double> field, std::span<double> coeffs) const;
  void analyze_adjoint(std::span<const double> coeff_grad, std::span<double> field_grad) const;
  void synthesize(std::span<const double> coeffs, std::span<double> field) const;
  void synthesize_adjoint(std::span<const double> field_grad, std::span<double> coeff_grad) const;

 private:
  std::vector<std::size_t> grid_;
  std::size_t levels_ = 0;
  ExtensionMode mode_ = ExtensionMode::Symmetric;
  const wavelet::WaveletFilter* filter_ = nullptr;
  std::vector<std::size_t> band_shape_;
  std::vector<std::vector<std::size_t>> extents_;
};

/// u[points, C] -> coefficients [C, K].
Tensor wavelet_analysis(const Tensor& u, const SpectralPlan& plan);
/// coefficients [C, K] -> field [points, C].
Tensor wavelet_synthesis(const Tensor& coeffs, const SpectralPlan& plan);
/// out[o, k] = sum_c kernel[c, o, k] * coeffs[c, k].
Tensor channel_contract(const Tensor& coeffs, const Tensor& kernel);

struct UpdateBlock {
  Tensor kernel;  // [width, width, K]
  Tensor mix;     // [width, width], 1x1 convolution
};

class WnoModel {
 public:
  WnoModel() = default;
  WnoModel(WnoConfig config, std::uint64_t seed);

  const WnoConfig& config() const { return config_; }
  const SpectralPlan& plan() const { return plan_; }

  /// Pre-activation output of update block `index` for u[points, width].
  Tensor update_block(const Tensor& u, std::size_t index) const;
  /// One time step through lift, blocks and the first projection layer with
  /// its activation site. Returns [points, hidden].
  Tensor penultimate(const Tensor& sample);
  /// Final projection of [points, hidden] to [grid..., 1].
  Tensor project(const Tensor& hidden) const;

  Tensor forward_single(const Tensor& sample);
  /// Direct encoding: the same sample at every step.
  Tensor forward_multi_sts(const Tensor& sample, std::size_t sts);
  /// Mean of per-step penultimate outputs, projected once.
  Tensor forward_train(const neurons::SpikeTrain& train);

  void reset_state();
  std::vector<neurons::NeuronLayer>& sites() { return sites_; }
  const std::vector<neurons::NeuronLayer>& sites() const { return sites_; }
  std::vector<neurons::SpikeCounter> site_counters() const;
  /// Sum over sites of the differentiable spike fraction (S-tilde).
  Tensor soft_spike_total() const;

  std::vector<UpdateBlock>& blocks() { return blocks_; }
  const std::vector<UpdateBlock>& blocks() const { return blocks_; }

  /// Every stored array by name, including fixed neuron parameters.
  std::vector<std::pair<std::string, Tensor>> named_tensors() const;
  std::vector<Tensor> trainable_parameters() const;
  /// Scalar count of weights; neuron leakage/threshold counted only on request.
  std::size_t parameter_count(bool include_neuron_parameters) const;

 private:
  WnoConfig config_;
  SpectralPlan plan_;
  Tensor lift_weight_, lift_bias_;
  std::vector<UpdateBlock> blocks_;
  Tensor proj1_weight_, proj1_bias_, proj2_weight_, proj2_bias_;
  std::vector<neurons::NeuronLayer> sites_;
};

}  // namespace vswno::wno
