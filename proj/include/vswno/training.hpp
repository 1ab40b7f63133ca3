#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "vswno/neurons.hpp"
#include "vswno/operator.hpp"
#include "vswno/tensor.hpp"

namespace vswno::training {

// ---------------------------------------------------------------------------
// Metrics

/// Splits both buffers into `samples` equal chunks and averages
/// 100 * ||pred - truth|| / ||truth|| over them.
double relative_l2_percent(std::span<const double> pred, std::span<const double> truth, std::size_t samples = 1);
double relative_l2_percent(const Tensor& pred, const Tensor& truth, std::size_t samples = 1);
std::vector<double> relative_l2_per_sample(std::span<const double> pred, std::span<const double> truth,
                                           std::size_t samples);

/// Differentiable ||pred - truth|| / ||truth|| for one sample (a fraction, not a percentage).
Tensor relative_l2_loss(const Tensor& pred, const Tensor& truth);

struct SpikeReport {
  std::vector<double> site_percent;  // S_i in [0, 100]
  double s_tilde = 0.0;              // sum of S_i / 100
  std::vector<neurons::SpikeCounter> counts;
};

/// Throws std::invalid_argument when a site has no possible spike slots.
SpikeReport spike_activity(const std::vector<neurons::SpikeCounter>& site_counters);
/// All-zero report for artificial sites (no spike slots exist).
SpikeReport silent_report(std::size_t sites);

double spiking_loss(double l_b, const SpikeReport& report, double alpha, double gamma);
/// alpha * l_b + gamma * soft_s. With gamma == 0 the sparsity term is not formed at all.
Tensor spiking_loss(const Tensor& l_b, const Tensor& soft_s, double alpha, double gamma);

// ---------------------------------------------------------------------------
// Energy model, in units of the per-operation energy E.

inline constexpr double kArtificialCost = 12.0;
inline constexpr double kLifCost = 7.0;
inline constexpr double kVsnCost = 12.0;

struct SiteActivity {
  std::size_t neurons = 0;
  std::uint64_t spikes = 0;  // summed over all STS
  double n_mt = 1.0;         // operations per neuron per pass
};

struct SiteEnergy {
  double n_mt = 0.0;
  double n_s = 0.0;  // spikes per neuron across all STS
  std::size_t neurons = 0;
  double artificial = 0.0;  // per neuron
  double lif = 0.0;
  double vsn = 0.0;
};

struct EnergyEstimate {
  std::vector<SiteEnergy> sites;
  double artificial_total = 0.0;
  double lif_total = 0.0;
  double vsn_total = 0.0;
  double lif_break_even = kArtificialCost / kLifCost;
  double vsn_break_even = kArtificialCost / kVsnCost;
};

EnergyEstimate energy_estimate(const std::vector<SiteActivity>& sites);
/// Spikes per neuron at which the spiking class matches an artificial neuron.
double break_even_spikes(neurons::NeuronKind kind);

// ---------------------------------------------------------------------------
// Optimiser

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

/// Coupled L2 decay (g + wd * p) followed by a bias-corrected ADAM update.
/// Moment buffers are sized on the first call and checked afterwards.
void adam_step(AdamState& state, const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads);
void adam_step(AdamState& state, const std::vector<Tensor>& params);

// ---------------------------------------------------------------------------
// Training loop

struct SampleSet {
  std::vector<Tensor> inputs;   // [grid..., in_channels], already normalised
  std::vector<Tensor> targets;  // [grid..., 1]
  std::size_t size() const { return inputs.size(); }
};

struct Split {
  SampleSet train;
  SampleSet test;
};

struct TrainSchedule {
  std::size_t epochs = 500;
  std::size_t batch_size = 20;
  double lr = 1e-3;
  std::size_t lr_step = 0;  // multiply lr by lr_decay every lr_step epochs; 0 keeps it constant
  double lr_decay = 1.0;
  double weight_decay = 1e-4;
  double alpha = 1.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  bool record_wall_time = true;
  std::size_t threads = 1;  // evaluation sharding only

  void validate() const;
};

struct EpochRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_eps = 0.0;
  std::vector<double> site_percent;
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<std::pair<std::string, std::string>> header;  // "# key: value" lines
  std::size_t sites = 0;
  std::vector<EpochRow> rows;
};

void write_log_csv(std::ostream& out, const TrainLog& log);
void write_log_csv(const std::string& path, const TrainLog& log);
/// Throws std::runtime_error naming the offending line.
TrainLog read_log_csv(std::istream& in);
TrainLog read_log_csv(const std::string& path);

class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(std::size_t epoch, std::size_t batch, const std::string& what);
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// Spike train for one normalised input under the model's encoding.
neurons::SpikeTrain encode_input(const wno::WnoConfig& config, const Tensor& input, std::uint64_t seed);

struct Evaluation {
  std::vector<double> per_sample_eps;
  double mean_eps = 0.0;
  double std_eps = 0.0;
  SpikeReport spikes;
  std::vector<neurons::SpikeCounter> counters;
  std::vector<Tensor> predictions;  // filled when requested
};

/// Forward passes without a tape. Samples may be sharded over `threads`
/// copies of the model; results do not depend on the thread count.
Evaluation evaluate(const wno::WnoModel& model, const SampleSet& data, std::uint64_t seed, std::size_t threads = 1,
                    bool keep_predictions = false);

using EpochCallback = std::function<void(const EpochRow&)>;

TrainLog train(wno::WnoModel& model, const Split& data, const TrainSchedule& schedule,
               const EpochCallback& on_epoch = {});

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
MeanStd mean_std(const std::vector<double>& values);

}  // namespace vswno::training
