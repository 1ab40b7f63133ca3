#include "vswno/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "vswno/data.hpp"
#include "vswno/serialization.hpp"
#include "vswno/training.hpp"

namespace vswno::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t thread_limit() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VSWNO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("VSWNO_THREADS must be a positive integer");
    n = std::min(n, static_cast<std::size_t>(v));
  }
  return n;
}

namespace {

class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string pm(const training::MeanStd& s, int precision = 2) { return fmt(s.mean, precision) + " ± " + fmt(s.std, precision); }

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open config " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
    return j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

void require_fresh(const std::string& path, bool force) {
  if (fs::exists(path) && !force) throw ConfigError(path + " exists; pass --force to overwrite");
}

data::Dataset open_dataset(const std::string& path) {
  if (path.empty()) throw ConfigError("no dataset given (--dataset or config \"dataset\")");
  if (!fs::exists(path)) throw MissingInput("dataset not found: " + path);
  return data::load_dataset(path);
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string config;
  std::string problem;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  std::string out;
  bool force = false;
};

int cmd_generate(const GenerateArgs& args, std::ostream& out) {
  json cfg = load_config(args.config);
  reject_unknown(cfg, {"problem", "burgers", "darcy", "out"}, "generate config");
  std::string problem = args.problem.empty() ? cfg.value("problem", std::string("burgers")) : args.problem;
  std::string path = args.out.empty() ? cfg.value("out", std::string()) : args.out;
  if (path.empty()) throw ConfigError("generate: no output path (--out)");
  require_fresh(path, args.force);

  auto scaled = [&](std::size_t count) {
    if (!args.scale) return count;
    if (!(*args.scale > 0.0)) throw ConfigError("--scale must be positive");
    return static_cast<std::size_t>(std::llround(static_cast<double>(count) * *args.scale));
  };

  data::Dataset ds;
  const std::size_t threads = thread_limit();
  if (problem == "burgers") {
    data::BurgersSpec spec;
    if (cfg.contains("burgers")) read_json(cfg.at("burgers"), spec, "burgers");
    if (args.seed) spec.seed = *args.seed;
    spec.n_train = scaled(spec.n_train);
    spec.n_test = scaled(spec.n_test);
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    ds = data::generate_burgers(spec, threads);
  } else if (problem == "darcy") {
    data::DarcySpec spec;
    if (cfg.contains("darcy")) read_json(cfg.at("darcy"), spec, "darcy");
    if (args.seed) spec.seed = *args.seed;
    spec.n_train = scaled(spec.n_train);
    spec.n_test = scaled(spec.n_test);
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    ds = data::generate_darcy(spec, threads);
  } else {
    throw ConfigError("unknown problem '" + problem + "' (expected burgers or darcy)");
  }
  data::save_dataset(path, ds);
  out << "wrote " << path << ": " << ds.problem << ", grid " << shape_string(ds.grid) << ", " << ds.n_train
      << " train + " << ds.n_test << " test samples, seed " << ds.metadata.value("seed", 0) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::string dataset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repetitions;
  std::optional<std::size_t> epochs;
  std::optional<double> alpha, gamma, lr;
  std::optional<std::size_t> sts;
  std::string neuron, sigma, encoding, name;
  std::string out;
  bool force = false;
  bool no_wall_time = false;
};

void fit_to_dataset(wno::WnoConfig& model, const data::Dataset& ds) {
  if (model.grid.empty()) model.grid = ds.grid;
  if (model.grid != ds.grid) {
    throw MismatchError("model grid " + shape_string(model.grid) + " does not match dataset grid " +
                        shape_string(ds.grid));
  }
  model.in_channels = ds.in_channels;
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  json cfg = load_config(args.config);
  reject_unknown(cfg, {"dataset", "model", "schedule", "repetitions", "name", "out"}, "train config");
  wno::WnoConfig model;
  training::TrainSchedule schedule;
  if (cfg.contains("model")) read_json(cfg.at("model"), model, "model");
  if (cfg.contains("schedule")) read_json(cfg.at("schedule"), schedule, "schedule");
  std::size_t repetitions = cfg.value("repetitions", std::size_t{1});
  std::string name = cfg.value("name", std::string("run"));
  std::string dataset_path = cfg.value("dataset", std::string());
  std::string prefix = cfg.value("out", std::string());

  if (!args.dataset.empty()) dataset_path = args.dataset;
  if (!args.out.empty()) prefix = args.out;
  if (!args.name.empty()) name = args.name;
  if (args.seed) schedule.seed = *args.seed;
  if (args.repetitions) repetitions = *args.repetitions;
  if (args.epochs) schedule.epochs = *args.epochs;
  if (args.alpha) schedule.alpha = *args.alpha;
  if (args.gamma) schedule.gamma = *args.gamma;
  if (args.lr) schedule.lr = *args.lr;
  if (args.sts) model.sts = *args.sts;
  try {
    if (!args.neuron.empty()) model.neuron = neurons::parse_kind(args.neuron);
    if (!args.sigma.empty()) model.sigma = neurons::parse_activation(args.sigma);
    if (!args.encoding.empty()) model.encoding = neurons::parse_encoding(args.encoding);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (args.no_wall_time) schedule.record_wall_time = false;
  schedule.threads = thread_limit();
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (prefix.empty()) throw ConfigError("train: no output prefix (--out)");

  const data::Dataset ds = open_dataset(dataset_path);
  fit_to_dataset(model, ds);
  try {
    model.validate();
    schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  auto path_for = [&](std::size_t r, const char* ext) {
    return repetitions == 1 ? prefix + ext : prefix + ".r" + std::to_string(r) + ext;
  };
  for (std::size_t r = 0; r < repetitions; ++r) {
    require_fresh(path_for(r, ".vswn"), args.force);
    require_fresh(path_for(r, ".csv"), args.force);
  }

  const data::Normalization norm = data::input_normalization(ds, model.encoding);
  const training::Split split = data::to_split(ds, norm);
  std::vector<double> final_eps;
  std::vector<std::vector<double>> final_sites;
  for (std::size_t r = 0; r < repetitions; ++r) {
    training::TrainSchedule rep = schedule;
    rep.seed = schedule.seed + r;
    const json resolved{{"dataset", dataset_path}, {"model", to_json(model)}, {"schedule", to_json(rep)}};
    wno::WnoModel net(model, rep.seed);
    training::TrainLog log = training::train(net, split, rep, [&](const training::EpochRow& row) {
      out << name << " rep " << r + 1 << "/" << repetitions << " epoch " << row.epoch << ": loss "
          << fmt(row.train_loss, 6) << ", test eps " << fmt(row.test_eps, 3) << "%\n";
    });
    log.header = {{"run", name},
                  {"repetition", std::to_string(r + 1)},
                  {"grid", shape_string(model.grid)},
                  {"config", resolved.dump()}};
    data::save_checkpoint(path_for(r, ".vswn"), net, norm, json{{"run", name}, {"schedule", to_json(rep)}});
    training::write_log_csv(path_for(r, ".csv"), log);
    if (!log.rows.empty()) {
      final_eps.push_back(log.rows.back().test_eps);
      final_sites.push_back(log.rows.back().site_percent);
    }
  }

  if (!final_eps.empty()) {
    out << name << ": test eps " << pm(training::mean_std(final_eps)) << " % over " << final_eps.size() << " run(s)";
    for (std::size_t s = 0; s < final_sites.front().size(); ++s) {
      std::vector<double> v;
      for (const auto& row : final_sites) v.push_back(row[s]);
      out << ", S_" << s + 1 << " " << pm(training::mean_std(v));
    }
    out << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  std::string split = "test";
  std::string out;
  bool force = false;
};

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  if (args.checkpoint.empty()) throw ConfigError("eval: --checkpoint is required");
  if (!fs::exists(args.checkpoint)) throw MissingInput("checkpoint not found: " + args.checkpoint);
  if (args.split != "train" && args.split != "test") throw ConfigError("eval: --split must be train or test");
  const data::Checkpoint ck = data::load_checkpoint(args.checkpoint);
  const data::Dataset ds = open_dataset(args.dataset);
  const auto& config = ck.model.config();
  if (config.grid != ds.grid || config.in_channels != ds.in_channels) {
    throw MismatchError("checkpoint grid " + shape_string(config.grid) + " does not match dataset grid " +
                        shape_string(ds.grid));
  }
  if (!args.out.empty()) require_fresh(args.out, args.force);

  std::uint64_t seed = 0;
  if (ck.metadata.contains("schedule")) seed = ck.metadata.at("schedule").value("seed", std::uint64_t{0});
  const training::Split split = data::to_split(ds, ck.norm);
  const auto& set = args.split == "train" ? split.train : split.test;
  const training::Evaluation ev = training::evaluate(ck.model, set, seed, thread_limit(), !args.out.empty());

  out << "split " << args.split << " (" << set.size() << " samples)\n";
  out << "eps " << fmt(ev.mean_eps, 4) << " ± " << fmt(ev.std_eps, 4) << " %\n";
  for (std::size_t s = 0; s < ev.spikes.site_percent.size(); ++s)
    out << "S_" << s + 1 << " " << fmt(ev.spikes.site_percent[s], 2) << " %\n";
  out << "S~ " << fmt(ev.spikes.s_tilde, 4) << '\n';

  // Energy per sample, units of E.
  std::vector<training::SiteActivity> activity;
  const auto& sites = ck.model.sites();
  for (std::size_t s = 0; s < sites.size(); ++s) {
    training::SiteActivity a;
    a.neurons = shape_size(sites[s].shape()) * set.size();
    a.spikes = ev.counters[s].spikes;
    a.n_mt = s + 1 < sites.size() ? static_cast<double>(config.width) : 1.0;
    activity.push_back(a);
  }
  const training::EnergyEstimate energy = training::energy_estimate(activity);
  const double per_sample = 1.0 / static_cast<double>(set.size());
  out << "site      N_mt      N_s   artificial          lif          vsn\n";
  for (std::size_t s = 0; s < energy.sites.size(); ++s) {
    const auto& e = energy.sites[s];
    char line[160];
    std::snprintf(line, sizeof line, "A_%-4zu %8.1f %8.4f %12.4g %12.4g %12.4g\n", s + 1, e.n_mt, e.n_s,
                  e.artificial, e.lif, e.vsn);
    out << line;
  }
  out << "total per sample: artificial " << energy.artificial_total * per_sample << ", lif "
      << energy.lif_total * per_sample << ", vsn " << energy.vsn_total * per_sample << '\n';
  out << "break-even N_s: lif " << fmt(energy.lif_break_even, 4) << ", vsn " << fmt(energy.vsn_break_even, 4) << '\n';

  if (!args.out.empty()) {
    data::Container c;
    Shape dims{set.size()};
    dims.insert(dims.end(), config.grid.begin(), config.grid.end());
    dims.push_back(1);
    std::vector<double> pred, truth;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto p = ev.predictions[i].data();
      const auto t = set.targets[i].data();
      pred.insert(pred.end(), p.begin(), p.end());
      truth.insert(truth.end(), t.begin(), t.end());
    }
    c.arrays.push_back({"prediction", data::DType::F64, dims, std::move(pred)});
    c.arrays.push_back({"truth", data::DType::F64, dims, std::move(truth)});
    c.arrays.push_back({"eps", data::DType::F64, {set.size()}, ev.per_sample_eps});
    c.metadata = json{{"kind", "predictions"}, {"checkpoint", args.checkpoint}, {"dataset", args.dataset},
                      {"split", args.split}};
    data::write_container(args.out, c);
    out << "wrote " << args.out << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> logs;
  bool csv = false;
};

int cmd_report(const ReportArgs& args, std::ostream& out) {
  if (args.logs.empty()) throw ConfigError("report: at least one log is required");
  struct Group {
    std::vector<double> eps;
    std::vector<std::vector<double>> sites;
  };
  std::map<std::string, Group> groups;
  std::vector<std::string> order;
  std::string grid;
  std::size_t site_count = 0;
  for (const auto& path : args.logs) {
    if (!fs::exists(path)) throw MissingInput("log not found: " + path);
    training::TrainLog log;
    try {
      log = training::read_log_csv(path);
    } catch (const std::runtime_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    std::string run = path;
    std::string log_grid;
    for (const auto& [k, v] : log.header) {
      if (k == "run") run = v;
      if (k == "grid") log_grid = v;
    }
    if (order.empty()) {
      grid = log_grid;
      site_count = log.sites;
    } else if (log_grid != grid) {
      throw MismatchError("cannot compare runs on different grids: " + path + " uses " + log_grid + ", expected " +
                          grid);
    } else if (log.sites != site_count) {
      throw MismatchError(path + " has " + std::to_string(log.sites) + " activation sites, expected " +
                          std::to_string(site_count));
    }
    if (log.rows.empty()) throw ConfigError(path + ": log has no epochs");
    if (!groups.count(run)) order.push_back(run);
    groups[run].eps.push_back(log.rows.back().test_eps);
    groups[run].sites.push_back(log.rows.back().site_percent);
  }

  if (args.csv) {
    out << "run,runs,eps_mean,eps_std";
    for (std::size_t s = 1; s <= site_count; ++s) out << ",S_" << s << "_mean,S_" << s << "_std";
    out << '\n';
  } else {
    char head[64];
    std::snprintf(head, sizeof head, "%-24s %4s %18s", "run", "n", "eps (%)");
    out << head;
    for (std::size_t s = 1; s <= site_count; ++s) {
      std::snprintf(head, sizeof head, " %16s", ("S_" + std::to_string(s)).c_str());
      out << head;
    }
    out << '\n';
  }
  for (const auto& run : order) {
    const Group& g = groups.at(run);
    const auto eps = training::mean_std(g.eps);
    std::vector<training::MeanStd> sites;
    for (std::size_t s = 0; s < site_count; ++s) {
      std::vector<double> v;
      for (const auto& row : g.sites) v.push_back(row[s]);
      sites.push_back(training::mean_std(v));
    }
    if (args.csv) {
      out << run << ',' << g.eps.size() << ',' << fmt(eps.mean, 6) << ',' << fmt(eps.std, 6);
      for (const auto& s : sites) out << ',' << fmt(s.mean, 6) << ',' << fmt(s.std, 6);
      out << '\n';
    } else {
      char line[128];
      std::snprintf(line, sizeof line, "%-24s %4zu %18s", run.c_str(), g.eps.size(), pm(eps).c_str());
      out << line;
      for (const auto& s : sites) {
        std::snprintf(line, sizeof line, " %16s", pm(s).c_str());
        out << line;
      }
      out << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// import

struct ImportArgs {
  std::string sidecar;
  std::string out;
  bool force = false;
};

int cmd_import(const ImportArgs& args, std::ostream& out) {
  if (args.sidecar.empty() || args.out.empty()) throw ConfigError("import: --sidecar and --out are required");
  if (!fs::exists(args.sidecar)) throw MissingInput("sidecar not found: " + args.sidecar);
  require_fresh(args.out, args.force);
  const data::Dataset ds = data::import_raw(args.sidecar);
  data::save_dataset(args.out, ds);
  out << "wrote " << args.out << ": " << ds.problem << ", grid " << shape_string(ds.grid) << ", " << ds.n_train
      << " train + " << ds.n_test << " test samples\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiking wavelet neural operators: data generation, training and evaluation", "vswno"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a Burgers or Darcy dataset container");
  g->add_option("--config", gen.config, "JSON config file");
  g->add_option("--problem", gen.problem, "burgers or darcy");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--scale", gen.scale, "Multiply train/test sample counts");
  g->add_option("--out", gen.out, "Output container");
  g->add_flag("--force", gen.force, "Overwrite an existing file");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model; writes <out>.vswn and <out>.csv");
  t->add_option("--config", tr.config, "JSON config file");
  t->add_option("--dataset", tr.dataset, "Dataset container");
  t->add_option("--seed", tr.seed, "Seed (repetition r uses seed + r)");
  t->add_option("--repetitions", tr.repetitions, "Independent runs");
  t->add_option("--epochs", tr.epochs, "Epoch count");
  t->add_option("--alpha", tr.alpha, "Weight of the data loss");
  t->add_option("--gamma", tr.gamma, "Weight of the spike penalty");
  t->add_option("--lr", tr.lr, "Learning rate");
  t->add_option("--sts", tr.sts, "Spike time steps");
  t->add_option("--neuron", tr.neuron, "artificial | lif | vsn");
  t->add_option("--sigma", tr.sigma, "identity | gelu");
  t->add_option("--encoding", tr.encoding, "direct | rate | triangular");
  t->add_option("--name", tr.name, "Run name recorded in the log");
  t->add_option("--out", tr.out, "Output prefix");
  t->add_flag("--force", tr.force, "Overwrite existing outputs");
  t->add_flag("--no-wall-time", tr.no_wall_time, "Write 0 in the wall_seconds column");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint container");
  e->add_option("--dataset", ev.dataset, "Dataset container");
  e->add_option("--split", ev.split, "train | test");
  e->add_option("--out", ev.out, "Write predictions to this container");
  e->add_flag("--force", ev.force, "Overwrite an existing file");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Compare training logs (mean ± std per run name)");
  r->add_option("logs", rep.logs, "CSV logs")->required();
  r->add_flag("--csv", rep.csv, "CSV instead of an aligned table");

  ImportArgs im;
  auto* i = app.add_subcommand("import", "Convert raw binaries plus a JSON sidecar into a container");
  i->add_option("--sidecar", im.sidecar, "Sidecar JSON");
  i->add_option("--out", im.out, "Output container");
  i->add_flag("--force", im.force, "Overwrite an existing file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& p) {
    err << "error: " << p.what() << '\n';
    return kConfigError;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out);
    if (t->parsed()) return cmd_train(tr, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (r->parsed()) return cmd_report(rep, out);
    if (i->parsed()) return cmd_import(im, out);
  } catch (const training::TrainingAborted& x) {
    err << "error: " << x.what() << '\n';
    return kNanAbort;
  } catch (const MismatchError& x) {
    err << "error: " << x.what() << '\n';
    return kMismatch;
  } catch (const MissingInput& x) {
    err << "error: " << x.what() << '\n';
    return kMissingInput;
  } catch (const data::ContainerError& x) {
    err << "error: " << x.what() << '\n';
    return x.kind() == data::ContainerErrorKind::Io ? kMissingInput : kFailure;
  } catch (const std::invalid_argument& x) {
    err << "error: " << x.what() << '\n';
    return kConfigError;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace vswno::cli
