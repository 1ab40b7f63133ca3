#include "vswno/operator.hpp"

#include <cmath>
#include <stdexcept>

namespace vswno::wno {

namespace {

using wavelet::Bands2d;
using wavelet::Field2d;

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  std::vector<double> values(shape_size(shape));
  for (double& v : values) v = rng.uniform(-bound, bound);
  return Tensor::parameter(std::move(shape), std::move(values));
}

Field2d field_from(std::span<const double> values, std::size_t rows, std::size_t cols) {
  return Field2d{rows, cols, std::vector<double>(values.begin(), values.end())};
}

Field2d band_slice(std::span<const double> coeffs, std::size_t band, std::size_t rows, std::size_t cols) {
  return field_from(coeffs.subspan(band * rows * cols, rows * cols), rows, cols);
}

}  // namespace

std::size_t WnoConfig::points() const {
  std::size_t n = 1;
  for (auto e : grid) n *= e;
  return n;
}

void WnoConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid WNO config: " + what); };
  if (grid.empty() || grid.size() > 2) fail("grid must be 1D or 2D");
  for (auto e : grid)
    if (e < 2) fail("grid extents must be at least 2");
  if (in_channels < 1) fail("in_channels must be >= 1");
  if (width < 1 || hidden < 1) fail("width and hidden must be >= 1");
  if (blocks < 1) fail("blocks (L) must be >= 1");
  if (levels < 1) fail("levels (m) must be >= 1");
  if (sts < 1) fail("sts must be >= 1");
  if (!(surrogate_slope > 0.0)) fail("surrogate slope must be positive");
  try {
    SpectralPlan(grid, wavelet, levels, mode);
  } catch (const wavelet::WaveletError& e) {
    fail(e.what());
  }
}

Tensor append_grid(const Tensor& sample) {
  if (sample.rank() < 2 || sample.rank() > 3)
    throw ShapeError("append_grid: expected [grid..., channels], got " + shape_string(sample.shape()));
  const std::size_t dims = sample.rank() - 1;
  const std::size_t c = sample.shape().back();
  const std::size_t out_c = c + dims;
  const std::size_t points = sample.size() / c;
  auto coord = [](std::size_t i, std::size_t n) {
    return n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
  };
  std::vector<double> out(points * out_c);
  const std::size_t cols = dims == 2 ? sample.shape()[1] : 1;
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t k = 0; k < c; ++k) out[p * out_c + k] = sample[p * c + k];
    if (dims == 1) {
      out[p * out_c + c] = coord(p, sample.shape()[0]);
    } else {
      out[p * out_c + c] = coord(p / cols, sample.shape()[0]);
      out[p * out_c + c + 1] = coord(p % cols, cols);
    }
  }
  Shape shape = sample.shape();
  shape.back() = out_c;
  return record_op("append_grid", {sample}, std::move(shape), std::move(out),
                   [points, c, out_c](std::span<const double> g, std::span<const std::span<double>> gi) {
                     for (std::size_t p = 0; p < points; ++p)
                       for (std::size_t k = 0; k < c; ++k) gi[0][p * c + k] += g[p * out_c + k];
                   });
}

// ---------------------------------------------------------------------------
// SpectralPlan

SpectralPlan::SpectralPlan(std::vector<std::size_t> grid, const std::string& wavelet, std::size_t levels,
                           ExtensionMode mode)
    : grid_(std::move(grid)), levels_(levels), mode_(mode), filter_(&wavelet::daubechies(wavelet)) {
  if (grid_.empty() || grid_.size() > 2) throw wavelet::WaveletError("spectral plan supports 1D and 2D grids");
  std::vector<std::vector<std::size_t>> per_axis;
  for (auto extent : grid_) per_axis.push_back(wavelet::level_extents(extent, filter_->taps(), mode_, levels_));
  extents_.resize(levels_);
  for (std::size_t l = 0; l < levels_; ++l)
    for (const auto& axis : per_axis) extents_[l].push_back(axis[l]);
  for (auto e : extents_.back()) band_shape_.push_back(wavelet::coefficient_length(e, filter_->taps(), mode_));
}

std::size_t SpectralPlan::points() const {
  std::size_t n = 1;
  for (auto e : grid_) n *= e;
  return n;
}

std::size_t SpectralPlan::band_size() const {
  std::size_t n = 1;
  for (auto e : band_shape_) n *= e;
  return n;
}

void SpectralPlan::analyze(std::span<const double> field, std::span<double> coeffs) const {
  const auto& f = *filter_;
  const std::size_t b = band_size();
  if (grid_.size() == 1) {
    std::vector<double> cur(field.begin(), field.end()), next;
    for (std::size_t l = 1; l < levels_; ++l) {
      next.resize(extents_[l][0]);
      wavelet::analysis_step(f, mode_, cur, next, {});
      cur.swap(next);
    }
    wavelet::analysis_step(f, mode_, cur, coeffs.subspan(0, b), coeffs.subspan(b, b));
    return;
  }
  Field2d cur = field_from(field, grid_[0], grid_[1]);
  for (std::size_t l = 1; l < levels_; ++l) cur = wavelet::analysis_step_2d(f, mode_, cur, false).ll;
  const Bands2d bands = wavelet::analysis_step_2d(f, mode_, cur, true);
  const Field2d* order[] = {&bands.ll, &bands.lh, &bands.hl, &bands.hh};
  for (std::size_t k = 0; k < 4; ++k) std::copy(order[k]->values.begin(), order[k]->values.end(), coeffs.begin() + k * b);
}

void SpectralPlan::analyze_adjoint(std::span<const double> coeff_grad, std::span<double> field_grad) const {
  const auto& f = *filter_;
  const std::size_t b = band_size();
  if (grid_.size() == 1) {
    std::vector<double> cur(extents_[levels_ - 1][0], 0.0), prev;
    wavelet::analysis_step_adjoint(f, mode_, coeff_grad.subspan(0, b), coeff_grad.subspan(b, b), cur);
    for (std::size_t l = levels_ - 1; l >= 1; --l) {
      prev.assign(extents_[l - 1][0], 0.0);
      wavelet::analysis_step_adjoint(f, mode_, cur, {}, prev);
      cur.swap(prev);
    }
    for (std::size_t i = 0; i < cur.size(); ++i) field_grad[i] += cur[i];
    return;
  }
  const std::size_t br = band_shape_[0];
  const std::size_t bc = band_shape_[1];
  Bands2d g{band_slice(coeff_grad, 0, br, bc), band_slice(coeff_grad, 1, br, bc), band_slice(coeff_grad, 2, br, bc),
            band_slice(coeff_grad, 3, br, bc)};
  const auto& last = extents_[levels_ - 1];
  Field2d cur{last[0], last[1], std::vector<double>(last[0] * last[1], 0.0)};
  wavelet::analysis_step_2d_adjoint(f, mode_, g, cur);
  for (std::size_t l = levels_ - 1; l >= 1; --l) {
    const auto& ext = extents_[l - 1];
    Field2d prev{ext[0], ext[1], std::vector<double>(ext[0] * ext[1], 0.0)};
    Bands2d lg;
    lg.ll = std::move(cur);
    wavelet::analysis_step_2d_adjoint(f, mode_, lg, prev);
    cur = std::move(prev);
  }
  for (std::size_t i = 0; i < cur.values.size(); ++i) field_grad[i] += cur.values[i];
}

void SpectralPlan::synthesize(std::span<const double> coeffs, std::span<double> field) const {
  const auto& f = *filter_;
  const std::size_t b = band_size();
  if (grid_.size() == 1) {
    std::vector<double> cur(extents_[levels_ - 1][0]), next;
    wavelet::synthesis_step(f, mode_, coeffs.subspan(0, b), coeffs.subspan(b, b), cur);
    for (std::size_t l = levels_ - 1; l >= 1; --l) {
      next.resize(extents_[l - 1][0]);
      wavelet::synthesis_step(f, mode_, cur, {}, next);
      cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), field.begin());
    return;
  }
  const std::size_t br = band_shape_[0];
  const std::size_t bc = band_shape_[1];
  Bands2d bands{band_slice(coeffs, 0, br, bc), band_slice(coeffs, 1, br, bc), band_slice(coeffs, 2, br, bc),
                band_slice(coeffs, 3, br, bc)};
  const auto& last = extents_[levels_ - 1];
  Field2d cur = wavelet::synthesis_step_2d(f, mode_, bands, last[0], last[1]);
  for (std::size_t l = levels_ - 1; l >= 1; --l) {
    const auto& ext = extents_[l - 1];
    Bands2d lo;
    lo.ll = std::move(cur);
    cur = wavelet::synthesis_step_2d(f, mode_, lo, ext[0], ext[1]);
  }
  std::copy(cur.values.begin(), cur.values.end(), field.begin());
}

void SpectralPlan::synthesize_adjoint(std::span<const double> field_grad, std::span<double> coeff_grad) const {
  const auto& f = *filter_;
  const std::size_t b = band_size();
  if (grid_.size() == 1) {
    std::vector<double> cur(field_grad.begin(), field_grad.end()), next;
    for (std::size_t l = 1; l < levels_; ++l) {
      next.assign(extents_[l][0], 0.0);
      wavelet::synthesis_step_adjoint(f, mode_, cur, next, {});
      cur.swap(next);
    }
    wavelet::synthesis_step_adjoint(f, mode_, cur, coeff_grad.subspan(0, b), coeff_grad.subspan(b, b));
    return;
  }
  Field2d cur = field_from(field_grad, grid_[0], grid_[1]);
  for (std::size_t l = 1; l < levels_; ++l) {
    cur = wavelet::synthesis_step_2d_adjoint(f, mode_, cur, extents_[l][0], extents_[l][1], false).ll;
  }
  const Bands2d g = wavelet::synthesis_step_2d_adjoint(f, mode_, cur, band_shape_[0], band_shape_[1], true);
  const Field2d* order[] = {&g.ll, &g.lh, &g.hl, &g.hh};
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < b; ++i) coeff_grad[k * b + i] += order[k]->values[i];
}

// ---------------------------------------------------------------------------
// Spectral primitives

Tensor wavelet_analysis(const Tensor& u, const SpectralPlan& plan) {
  const std::size_t n = plan.points();
  if (u.rank() != 2 || u.shape()[0] != n)
    throw ShapeError("wavelet_analysis: expected [" + std::to_string(n) + ", C], got " + shape_string(u.shape()));
  const std::size_t channels = u.shape()[1];
  const std::size_t k = plan.coefficient_count();
  std::vector<double> out(channels * k);
  std::vector<double> line(n);
  const auto uv = u.data();
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t p = 0; p < n; ++p) line[p] = uv[p * channels + c];
    plan.analyze(line, std::span<double>(out).subspan(c * k, k));
  }
  return record_op("wavelet_analysis", {u}, {channels, k}, std::move(out),
                   [plan, n, channels, k](std::span<const double> g, std::span<const std::span<double>> gi) {
                     std::vector<double> line(n);
                     for (std::size_t c = 0; c < channels; ++c) {
                       std::fill(line.begin(), line.end(), 0.0);
                       plan.analyze_adjoint(g.subspan(c * k, k), line);
                       for (std::size_t p = 0; p < n; ++p) gi[0][p * channels + c] += line[p];
                     }
                   });
}

Tensor wavelet_synthesis(const Tensor& coeffs, const SpectralPlan& plan) {
  const std::size_t k = plan.coefficient_count();
  if (coeffs.rank() != 2 || coeffs.shape()[1] != k)
    throw ShapeError("wavelet_synthesis: expected [C, " + std::to_string(k) + "], got " + shape_string(coeffs.shape()));
  const std::size_t channels = coeffs.shape()[0];
  const std::size_t n = plan.points();
  std::vector<double> out(n * channels);
  std::vector<double> line(n);
  for (std::size_t c = 0; c < channels; ++c) {
    plan.synthesize(coeffs.data().subspan(c * k, k), line);
    for (std::size_t p = 0; p < n; ++p) out[p * channels + c] = line[p];
  }
  return record_op("wavelet_synthesis", {coeffs}, {n, channels}, std::move(out),
                   [plan, n, channels, k](std::span<const double> g, std::span<const std::span<double>> gi) {
                     std::vector<double> line(n);
                     for (std::size_t c = 0; c < channels; ++c) {
                       for (std::size_t p = 0; p < n; ++p) line[p] = g[p * channels + c];
                       plan.synthesize_adjoint(line, gi[0].subspan(c * k, k));
                     }
                   });
}

Tensor channel_contract(const Tensor& coeffs, const Tensor& kernel) {
  if (coeffs.rank() != 2 || kernel.rank() != 3 || kernel.shape()[0] != coeffs.shape()[0] ||
      kernel.shape()[2] != coeffs.shape()[1]) {
    throw ShapeError("channel_contract: coefficients " + shape_string(coeffs.shape()) + " incompatible with kernel " +
                     shape_string(kernel.shape()));
  }
  const std::size_t cin = kernel.shape()[0];
  const std::size_t cout = kernel.shape()[1];
  const std::size_t k = kernel.shape()[2];
  std::vector<double> out(cout * k, 0.0);
  const auto cv = coeffs.data();
  const auto rv = kernel.data();
  for (std::size_t c = 0; c < cin; ++c) {
    const double* x = cv.data() + c * k;
    for (std::size_t o = 0; o < cout; ++o) {
      const double* r = rv.data() + (c * cout + o) * k;
      double* y = out.data() + o * k;
      for (std::size_t i = 0; i < k; ++i) y[i] += r[i] * x[i];
    }
  }
  return record_op("channel_contract", {coeffs, kernel}, {cout, k}, std::move(out),
                   [coeffs, kernel, cin, cout, k](std::span<const double> g, std::span<const std::span<double>> gi) {
                     const auto cv = coeffs.data();
                     const auto rv = kernel.data();
                     for (std::size_t c = 0; c < cin; ++c) {
                       for (std::size_t o = 0; o < cout; ++o) {
                         const double* r = rv.data() + (c * cout + o) * k;
                         const double* go = g.data() + o * k;
                         if (!gi[0].empty()) {
                           double* gx = gi[0].data() + c * k;
                           for (std::size_t i = 0; i < k; ++i) gx[i] += r[i] * go[i];
                         }
                         if (!gi[1].empty()) {
                           double* gr = gi[1].data() + (c * cout + o) * k;
                           const double* x = cv.data() + c * k;
                           for (std::size_t i = 0; i < k; ++i) gr[i] += x[i] * go[i];
                         }
                       }
                     }
                   });
}

// ---------------------------------------------------------------------------
// WnoModel

WnoModel::WnoModel(WnoConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  plan_ = SpectralPlan(config_.grid, config_.wavelet, config_.levels, config_.mode);
  Rng rng(seed);
  const std::size_t d_a = config_.lifted_channels();
  const std::size_t w = config_.width;
  const std::size_t h = config_.hidden;
  const std::size_t k = plan_.coefficient_count();

  // He-uniform on the pointwise maps: with thresholds drawn from U[0, 1],
  // smaller pre-activations leave most units silent at the start.
  const double lift_bound = std::sqrt(6.0 / static_cast<double>(d_a));
  lift_weight_ = uniform_tensor({d_a, w}, lift_bound, rng);
  lift_bias_ = uniform_tensor({w}, 1.0 / std::sqrt(static_cast<double>(d_a)), rng);
  const double kernel_bound = 1.0 / (static_cast<double>(w) * std::sqrt(static_cast<double>(plan_.band_size())));
  const double mix_bound = std::sqrt(6.0 / static_cast<double>(w));
  for (std::size_t b = 0; b < config_.blocks; ++b) {
    UpdateBlock block;
    block.kernel = uniform_tensor({w, w, k}, kernel_bound, rng);
    block.mix = uniform_tensor({w, w}, mix_bound, rng);
    blocks_.push_back(std::move(block));
  }
  proj1_weight_ = uniform_tensor({w, h}, mix_bound, rng);
  proj1_bias_ = uniform_tensor({h}, 1.0 / std::sqrt(static_cast<double>(w)), rng);
  const double proj2_bound = 1.0 / std::sqrt(static_cast<double>(h));
  proj2_weight_ = uniform_tensor({h, 1}, proj2_bound, rng);
  proj2_bias_ = uniform_tensor({1}, proj2_bound, rng);

  const std::size_t n = config_.points();
  for (std::size_t s = 0; s < config_.blocks; ++s) {
    const Shape shape = s + 1 < config_.blocks ? Shape{n, w} : Shape{n, h};
    sites_.emplace_back(config_.neuron, config_.sigma, shape, config_.trainable_neurons, rng);
    sites_.back().set_slope(config_.surrogate_slope);
  }
}

Tensor WnoModel::update_block(const Tensor& u, std::size_t index) const {
  const UpdateBlock& block = blocks_.at(index);
  const Tensor coeffs = wavelet_analysis(u, plan_);
  const Tensor spectral = wavelet_synthesis(channel_contract(coeffs, block.kernel), plan_);
  return add(spectral, pointwise_conv(u, block.mix));
}

Tensor WnoModel::penultimate(const Tensor& sample) {
  Shape expected = config_.grid;
  expected.push_back(config_.in_channels);
  if (sample.shape() != expected) {
    throw ShapeError("WNO input: expected " + shape_string(expected) + ", got " + shape_string(sample.shape()));
  }
  const std::size_t n = config_.points();
  Tensor u = linear(reshape(append_grid(sample), {n, config_.lifted_channels()}), lift_weight_, lift_bias_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    u = update_block(u, b);
    if (b + 1 < blocks_.size()) u = sites_[b].step(u);
  }
  return sites_.back().step(linear(u, proj1_weight_, proj1_bias_));
}

Tensor WnoModel::project(const Tensor& hidden) const {
  Shape shape = config_.grid;
  shape.push_back(1);
  return reshape(linear(hidden, proj2_weight_, proj2_bias_), std::move(shape));
}

Tensor WnoModel::forward_single(const Tensor& sample) {
  reset_state();
  return project(penultimate(sample));
}

Tensor WnoModel::forward_multi_sts(const Tensor& sample, std::size_t sts) {
  return forward_train(neurons::encode_direct(sample, sts));
}

Tensor WnoModel::forward_train(const neurons::SpikeTrain& train) {
  reset_state();
  std::vector<Tensor> steps;
  steps.reserve(train.sts);
  for (std::size_t t = 0; t < train.sts; ++t) steps.push_back(penultimate(train.step(t)));
  if (steps.size() == 1) return project(steps.front());
  return project(reduce(stack(steps), ReduceOp::Mean, 0));
}

void WnoModel::reset_state() {
  for (auto& site : sites_) site.reset_state();
}

std::vector<neurons::SpikeCounter> WnoModel::site_counters() const {
  std::vector<neurons::SpikeCounter> out;
  for (const auto& site : sites_) out.push_back(site.spike_counter());
  return out;
}

Tensor WnoModel::soft_spike_total() const {
  std::vector<Tensor> fractions;
  for (const auto& site : sites_)
    if (site.spiking() && !site.spike_indicators().empty()) fractions.push_back(site.soft_spike_fraction());
  if (fractions.empty()) return Tensor::scalar(0.0);
  return sum(stack(fractions));
}

std::vector<std::pair<std::string, Tensor>> WnoModel::named_tensors() const {
  std::vector<std::pair<std::string, Tensor>> out{{"lift.weight", lift_weight_}, {"lift.bias", lift_bias_}};
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    out.emplace_back("block" + std::to_string(b) + ".kernel", blocks_[b].kernel);
    out.emplace_back("block" + std::to_string(b) + ".mix", blocks_[b].mix);
  }
  out.emplace_back("proj1.weight", proj1_weight_);
  out.emplace_back("proj1.bias", proj1_bias_);
  out.emplace_back("proj2.weight", proj2_weight_);
  out.emplace_back("proj2.bias", proj2_bias_);
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    if (!sites_[s].spiking()) continue;
    out.emplace_back("site" + std::to_string(s + 1) + ".beta", sites_[s].beta());
    out.emplace_back("site" + std::to_string(s + 1) + ".threshold", sites_[s].threshold());
  }
  return out;
}

std::vector<Tensor> WnoModel::trainable_parameters() const {
  std::vector<Tensor> out{lift_weight_, lift_bias_};
  for (const auto& b : blocks_) {
    out.push_back(b.kernel);
    out.push_back(b.mix);
  }
  for (const Tensor& t : {proj1_weight_, proj1_bias_, proj2_weight_, proj2_bias_}) out.push_back(t);
  for (const auto& site : sites_)
    for (const auto& t : site.parameters()) out.push_back(t);
  return out;
}

std::size_t WnoModel::parameter_count(bool include_neuron_parameters) const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_tensors()) {
    const bool neuron = name.rfind("site", 0) == 0;
    if (!neuron || include_neuron_parameters) n += t.size();
  }
  return n;
}

}  // namespace vswno::wno
