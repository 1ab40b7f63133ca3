#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "vswno/random.hpp"
#include "vswno/training.hpp"

namespace vswno::training {

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566;
constexpr std::uint64_t kEncodeStream = 0x656e636f;
constexpr std::uint64_t kEvalStream = 0x6576616c;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size())
    throw std::runtime_error("log line " + std::to_string(line_no) + ": malformed number '" + cell + "'");
  return v;
}

void check_sets(const SampleSet& set, const char* name) {
  if (set.inputs.size() != set.targets.size())
    throw std::invalid_argument(std::string(name) + " set: input and target counts differ");
}

}  // namespace

TrainingAborted::TrainingAborted(std::size_t epoch, std::size_t batch, const std::string& what)
    : std::runtime_error("training aborted at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                         ": " + what),
      epoch_(epoch),
      batch_(batch) {}

void TrainSchedule::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid schedule: " + what); };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must be in (0, 1]");
  if (weight_decay < 0.0) fail("weight_decay must be nonnegative");
  if (alpha < 0.0 || gamma < 0.0) fail("alpha and gamma must be nonnegative");
  if (threads < 1) fail("threads must be >= 1");
}

neurons::SpikeTrain encode_input(const wno::WnoConfig& config, const Tensor& input, std::uint64_t seed) {
  switch (config.encoding) {
    case neurons::Encoding::Rate:
      return neurons::encode_rate(input, config.sts, seed);
    case neurons::Encoding::Triangular:
      return neurons::encode_triangular(input, config.sts);
    case neurons::Encoding::Direct:
      break;
  }
  return neurons::encode_direct(input, config.sts);
}

Evaluation evaluate(const wno::WnoModel& model, const SampleSet& data, std::uint64_t seed, std::size_t threads,
                    bool keep_predictions) {
  check_sets(data, "evaluation");
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("evaluation set is empty");
  const std::size_t sites = model.sites().size();
  const std::uint64_t eval_seed = derive_seed(seed, kEvalStream, 0);

  std::vector<double> eps(n);
  std::vector<Tensor> preds(n);
  std::vector<std::vector<neurons::SpikeCounter>> counters(n);
  auto run = [&](std::size_t begin, std::size_t end) {
    wno::WnoModel local = model;
    for (std::size_t i = begin; i < end; ++i) {
      const auto train = encode_input(model.config(), data.inputs[i], derive_seed(eval_seed, i, kEncodeStream));
      preds[i] = local.forward_train(train);
      eps[i] = relative_l2_percent(preds[i], data.targets[i]);
      counters[i] = local.site_counters();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  Evaluation out;
  out.per_sample_eps = eps;
  const MeanStd stats = mean_std(eps);
  out.mean_eps = stats.mean;
  out.std_eps = stats.std;
  out.counters.assign(sites, {});
  for (const auto& c : counters)
    for (std::size_t s = 0; s < sites; ++s) out.counters[s] += c[s];
  const bool spiking = model.config().neuron != neurons::NeuronKind::Artificial;
  out.spikes = spiking ? spike_activity(out.counters) : silent_report(sites);
  if (keep_predictions) out.predictions = std::move(preds);
  return out;
}

TrainLog train(wno::WnoModel& model, const Split& data, const TrainSchedule& schedule, const EpochCallback& on_epoch) {
  schedule.validate();
  check_sets(data.train, "training");
  check_sets(data.test, "test");
  if (schedule.epochs > 0 && data.train.size() == 0) throw std::invalid_argument("training set is empty");

  TrainLog log;
  log.sites = model.sites().size();
  AdamState adam;
  adam.config.lr = schedule.lr;
  adam.config.weight_decay = schedule.weight_decay;
  const std::vector<Tensor> params = model.trainable_parameters();
  const std::size_t n = data.train.size();

  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (schedule.lr_step > 0)
      adam.config.lr = schedule.lr * std::pow(schedule.lr_decay, static_cast<double>((epoch - 1) / schedule.lr_step));
    const auto order = shuffled(n, derive_seed(schedule.seed, kShuffleStream, epoch));
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < n; first += schedule.batch_size, ++batch_index) {
      const std::size_t last = std::min(n, first + schedule.batch_size);
      Tape tape;
      TapeScope scope(tape);
      std::vector<Tensor> losses;
      std::vector<Tensor> soft;
      for (std::size_t k = first; k < last; ++k) {
        const std::size_t idx = order[k];
        const auto train =
            encode_input(model.config(), data.train.inputs[idx], derive_seed(schedule.seed, epoch, idx));
        const Tensor pred = model.forward_train(train);
        losses.push_back(relative_l2_loss(pred, data.train.targets[idx]));
        if (schedule.gamma > 0.0) soft.push_back(model.soft_spike_total());
      }
      const Tensor l_b = losses.size() == 1 ? losses.front() : mean(stack(losses));
      Tensor s_soft;
      if (schedule.gamma > 0.0) s_soft = soft.size() == 1 ? soft.front() : mean(stack(soft));
      const Tensor loss = spiking_loss(l_b, s_soft, schedule.alpha, schedule.gamma);
      const double value = loss.item();
      if (!std::isfinite(value)) throw TrainingAborted(epoch, batch_index + 1, "loss is " + format_number(value));
      tape.backward(loss);
      adam_step(adam, params);
      loss_sum += value * static_cast<double>(last - first);
    }

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(n);
    if (data.test.size() > 0) {
      const Evaluation ev = evaluate(model, data.test, schedule.seed, schedule.threads);
      row.test_eps = ev.mean_eps;
      row.site_percent = ev.spikes.site_percent;
    } else {
      row.test_eps = std::nan("");
      row.site_percent.assign(log.sites, 0.0);
    }
    if (schedule.record_wall_time)
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_epoch) on_epoch(row);
    log.rows.push_back(std::move(row));
  }
  return log;
}

// ---------------------------------------------------------------------------
// CSV

void write_log_csv(std::ostream& out, const TrainLog& log) {
  for (const auto& [key, value] : log.header) out << "# " << key << ": " << value << '\n';
  out << "epoch,train_loss,test_eps";
  for (std::size_t s = 1; s <= log.sites; ++s) out << ",S_" << s;
  out << ",wall_seconds\n";
  for (const auto& row : log.rows) {
    out << row.epoch << ',' << format_number(row.train_loss) << ',' << format_number(row.test_eps);
    for (std::size_t s = 0; s < log.sites; ++s)
      out << ',' << format_number(s < row.site_percent.size() ? row.site_percent[s] : 0.0);
    out << ',' << format_number(row.wall_seconds) << '\n';
  }
}

void write_log_csv(const std::string& path, const TrainLog& log) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write log " + tmp);
    write_log_csv(out, log);
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot move log into place: " + path);
}

TrainLog read_log_csv(std::istream& in) {
  TrainLog log;
  std::string line;
  std::size_t line_no = 0;
  bool have_columns = false;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("log line " + std::to_string(line_no) + ": header comment without ':'");
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(' '));
        s.erase(s.find_last_not_of(' ') + 1);
      };
      trim(key);
      trim(value);
      log.header.emplace_back(key, value);
      continue;
    }
    const auto cells = split_csv(line);
    if (!have_columns) {
      if (cells.size() < 4 || cells[0] != "epoch" || cells[1] != "train_loss" || cells[2] != "test_eps" ||
          cells.back() != "wall_seconds") {
        throw std::runtime_error("log line " + std::to_string(line_no) + ": unexpected column header");
      }
      for (std::size_t s = 3; s + 1 < cells.size(); ++s) {
        if (cells[s] != "S_" + std::to_string(s - 2))
          throw std::runtime_error("log line " + std::to_string(line_no) + ": unexpected column '" + cells[s] + "'");
      }
      columns = cells.size();
      log.sites = columns - 4;
      have_columns = true;
      continue;
    }
    if (cells.size() != columns) {
      throw std::runtime_error("log line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                               " fields, found " + std::to_string(cells.size()));
    }
    EpochRow row;
    const double epoch = parse_cell(cells[0], line_no);
    if (epoch < 0 || std::floor(epoch) != epoch)
      throw std::runtime_error("log line " + std::to_string(line_no) + ": epoch must be a nonnegative integer");
    row.epoch = static_cast<std::size_t>(epoch);
    row.train_loss = parse_cell(cells[1], line_no);
    row.test_eps = parse_cell(cells[2], line_no);
    for (std::size_t s = 0; s < log.sites; ++s) row.site_percent.push_back(parse_cell(cells[3 + s], line_no));
    row.wall_seconds = parse_cell(cells.back(), line_no);
    log.rows.push_back(std::move(row));
  }
  if (!have_columns) throw std::runtime_error("log has no column header");
  return log;
}

TrainLog read_log_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log " + path);
  return read_log_csv(in);
}

}  // namespace vswno::training
