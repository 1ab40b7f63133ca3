#include <cmath>
#include <stdexcept>
#include <string>

#include "vswno/training.hpp"

namespace vswno::training {

std::vector<double> relative_l2_per_sample(std::span<const double> pred, std::span<const double> truth,
                                           std::size_t samples) {
  if (pred.size() != truth.size()) throw ShapeError("relative_l2: prediction and truth sizes differ");
  if (samples == 0 || pred.size() % samples != 0) throw ShapeError("relative_l2: sample count does not divide data");
  const std::size_t n = pred.size() / samples;
  std::vector<double> out(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = s * n; i < (s + 1) * n; ++i) {
      const double d = pred[i] - truth[i];
      num += d * d;
      den += truth[i] * truth[i];
    }
    if (den == 0.0) throw std::invalid_argument("relative_l2: truth sample " + std::to_string(s) + " has zero norm");
    out[s] = 100.0 * std::sqrt(num) / std::sqrt(den);
  }
  return out;
}

double relative_l2_percent(std::span<const double> pred, std::span<const double> truth, std::size_t samples) {
  const auto per = relative_l2_per_sample(pred, truth, samples);
  double total = 0.0;
  for (double e : per) total += e;
  return total / static_cast<double>(per.size());
}

double relative_l2_percent(const Tensor& pred, const Tensor& truth, std::size_t samples) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("relative_l2: shapes " + shape_string(pred.shape()) + " and " + shape_string(truth.shape()));
  }
  return relative_l2_percent(pred.data(), truth.data(), samples);
}

Tensor relative_l2_loss(const Tensor& pred, const Tensor& truth) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("relative_l2_loss: shapes " + shape_string(pred.shape()) + " and " +
                     shape_string(truth.shape()));
  }
  double den = 0.0;
  for (double t : truth.data()) den += t * t;
  if (den == 0.0) throw std::invalid_argument("relative_l2_loss: truth has zero norm");
  const Tensor diff = sub(pred, truth.detach());
  return scale(sqrt(sum(mul(diff, diff))), 1.0 / std::sqrt(den));
}

SpikeReport spike_activity(const std::vector<neurons::SpikeCounter>& site_counters) {
  SpikeReport report;
  report.counts = site_counters;
  for (std::size_t i = 0; i < site_counters.size(); ++i) {
    const auto& c = site_counters[i];
    if (c.possible == 0) throw std::invalid_argument("spike_activity: site " + std::to_string(i + 1) + " has no spike slots");
    const double s = 100.0 * static_cast<double>(c.spikes) / static_cast<double>(c.possible);
    report.site_percent.push_back(s);
    report.s_tilde += s / 100.0;
  }
  return report;
}

SpikeReport silent_report(std::size_t sites) {
  SpikeReport report;
  report.site_percent.assign(sites, 0.0);
  report.counts.assign(sites, {});
  return report;
}

double spiking_loss(double l_b, const SpikeReport& report, double alpha, double gamma) {
  if (alpha < 0.0 || gamma < 0.0) throw std::invalid_argument("spiking_loss: weights must be nonnegative");
  return alpha * l_b + gamma * report.s_tilde;
}

Tensor spiking_loss(const Tensor& l_b, const Tensor& soft_s, double alpha, double gamma) {
  if (alpha < 0.0 || gamma < 0.0) throw std::invalid_argument("spiking_loss: weights must be nonnegative");
  const Tensor base = alpha == 1.0 ? l_b : scale(l_b, alpha);
  if (gamma == 0.0) return base;
  return add(base, scale(soft_s, gamma));
}

double break_even_spikes(neurons::NeuronKind kind) {
  switch (kind) {
    case neurons::NeuronKind::LIF:
      return kArtificialCost / kLifCost;
    case neurons::NeuronKind::VSN:
      return kArtificialCost / kVsnCost;
    case neurons::NeuronKind::Artificial:
      break;
  }
  throw std::invalid_argument("break_even_spikes: artificial neurons have no spike budget");
}

EnergyEstimate energy_estimate(const std::vector<SiteActivity>& sites) {
  EnergyEstimate est;
  for (const auto& site : sites) {
    SiteEnergy e;
    e.n_mt = site.n_mt;
    e.neurons = site.neurons;
    e.n_s = site.neurons == 0 ? 0.0 : static_cast<double>(site.spikes) / static_cast<double>(site.neurons);
    e.artificial = kArtificialCost * e.n_mt;
    e.lif = kLifCost * e.n_mt * e.n_s;
    e.vsn = kVsnCost * e.n_mt * e.n_s;
    const double count = static_cast<double>(site.neurons);
    est.artificial_total += count * e.artificial;
    est.lif_total += count * e.lif;
    est.vsn_total += count * e.vsn;
    est.sites.push_back(e);
  }
  return est;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace vswno::training
