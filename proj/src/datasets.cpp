#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <thread>

#include "vswno/data.hpp"
#include "vswno/random.hpp"
#include "vswno/serialization.hpp"

namespace vswno::data {

namespace {

constexpr std::uint64_t kDrawStream = 0x67726664;

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Runs fn(i) for i in [0, count) over up to `threads` workers, contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(count, (w + 1) * chunk); ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void check_counts(std::size_t n_train, std::size_t n_test) {
  if (n_train == 0) throw std::invalid_argument("dataset needs at least one training sample");
  if (n_test == 0) throw std::invalid_argument("dataset needs at least one test sample");
}

// Sample i of the combined (train, test) sequence lands in the right split.
void store(Dataset& ds, std::size_t i, const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t px = ds.points() * ds.in_channels;
  const std::size_t py = ds.points();
  const bool train = i < ds.n_train;
  const std::size_t j = train ? i : i - ds.n_train;
  auto& dx = train ? ds.train_x : ds.test_x;
  auto& dy = train ? ds.train_y : ds.test_y;
  std::transform(x.begin(), x.end(), dx.begin() + j * px, to_f32);
  std::transform(y.begin(), y.end(), dy.begin() + j * py, to_f32);
}

void allocate(Dataset& ds) {
  ds.train_x.assign(ds.n_train * ds.points() * ds.in_channels, 0.0);
  ds.test_x.assign(ds.n_test * ds.points() * ds.in_channels, 0.0);
  ds.train_y.assign(ds.n_train * ds.points(), 0.0);
  ds.test_y.assign(ds.n_test * ds.points(), 0.0);
}

Shape sample_dims(const Dataset& ds, std::size_t count, std::size_t channels) {
  Shape dims{count};
  dims.insert(dims.end(), ds.grid.begin(), ds.grid.end());
  dims.push_back(channels);
  return dims;
}

void check_array(const NamedArray& a, const Shape& expected) {
  if (a.dims != expected) {
    throw ContainerError(ContainerErrorKind::Invalid, "array '" + a.name + "' has dims " + shape_string(a.dims) +
                                                          ", expected " + shape_string(expected));
  }
}

std::vector<double> read_raw(const std::filesystem::path& path, std::size_t count, bool f32) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError(ContainerErrorKind::Io, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t width = f32 ? 4 : 8;
  if (bytes.size() != count * width) {
    throw ContainerError(ContainerErrorKind::Truncated, path.string() + ": expected " +
                                                            std::to_string(count * width) + " bytes, found " +
                                                            std::to_string(bytes.size()));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < width; ++b) bits |= static_cast<std::uint64_t>(bytes[i * width + b]) << (8 * b);
    out[i] = f32 ? static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(bits)))
                 : std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace

std::size_t Dataset::points() const {
  std::size_t n = 1;
  for (auto e : grid) n *= e;
  return n;
}

void BurgersSpec::validate() const {
  grf.validate();
  if (grf.basis != GrfBasis::FourierPeriodic) throw std::invalid_argument("burgers: GRF basis must be fourier-periodic");
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("burgers: n must be even and >= 4");
  if (!(nu > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("burgers: nu and t_end must be positive");
  check_counts(n_train, n_test);
}

void DarcySpec::validate() const {
  grf.validate();
  if (grf.basis != GrfBasis::CosineNeumann) throw std::invalid_argument("darcy: GRF basis must be cosine-neumann");
  if (h < 3 || w < 3) throw std::invalid_argument("darcy: grid must be at least 3x3");
  check_counts(n_train, n_test);
}

Dataset generate_burgers(const BurgersSpec& spec, std::size_t threads) {
  spec.validate();
  Dataset ds;
  ds.problem = "burgers";
  ds.grid = {spec.n};
  ds.n_train = spec.n_train;
  ds.n_test = spec.n_test;
  allocate(ds);
  parallel_for(spec.n_train + spec.n_test, threads, [&](std::size_t i) {
    GrfSpec g = spec.grf;
    g.seed = derive_seed(spec.seed, kDrawStream, i);
    const auto u0 = sample_grf_1d(g, spec.n);
    store(ds, i, u0, burgers_solve(u0, spec.nu, spec.t_end));
  });
  ds.metadata = json{{"generator", "burgers"}, {"spec", to_json(spec)}, {"seed", spec.seed}};
  return ds;
}

Dataset generate_darcy(const DarcySpec& spec, std::size_t threads) {
  spec.validate();
  Dataset ds;
  ds.problem = "darcy";
  ds.grid = {spec.h, spec.w};
  ds.n_train = spec.n_train;
  ds.n_test = spec.n_test;
  allocate(ds);
  parallel_for(spec.n_train + spec.n_test, threads, [&](std::size_t i) {
    GrfSpec g = spec.grf;
    g.seed = derive_seed(spec.seed, kDrawStream, i);
    const auto a = permeability_pushforward(sample_grf_2d(g, spec.h, spec.w));
    store(ds, i, a, darcy_solve_rect(a, spec.h, spec.w, spec.source).u);
  });
  ds.metadata = json{{"generator", "darcy"}, {"spec", to_json(spec)}, {"seed", spec.seed}};
  return ds;
}

Container dataset_to_container(const Dataset& ds) {
  Container c;
  c.arrays.push_back({"train_x", DType::F32, sample_dims(ds, ds.n_train, ds.in_channels), ds.train_x});
  c.arrays.push_back({"train_y", DType::F32, sample_dims(ds, ds.n_train, 1), ds.train_y});
  c.arrays.push_back({"test_x", DType::F32, sample_dims(ds, ds.n_test, ds.in_channels), ds.test_x});
  c.arrays.push_back({"test_y", DType::F32, sample_dims(ds, ds.n_test, 1), ds.test_y});
  const Normalization range = min_max_normalization(ds);
  c.metadata = ds.metadata;
  c.metadata["kind"] = "dataset";
  c.metadata["problem"] = ds.problem;
  c.metadata["grid"] = ds.grid;
  c.metadata["in_channels"] = ds.in_channels;
  c.metadata["input_range"] = {range.shift, range.shift + range.scale};
  return c;
}

Dataset dataset_from_container(const Container& c) {
  const json& m = c.metadata;
  if (m.value("kind", "") != "dataset")
    throw ContainerError(ContainerErrorKind::Invalid, "container does not hold a dataset");
  Dataset ds;
  try {
    ds.problem = m.at("problem").get<std::string>();
    ds.grid = m.at("grid").get<Shape>();
    ds.in_channels = m.at("in_channels").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ContainerError(ContainerErrorKind::Invalid, std::string("dataset metadata: ") + e.what());
  }
  const auto& tx = c.at("train_x");
  const auto& ty = c.at("train_y");
  const auto& vx = c.at("test_x");
  const auto& vy = c.at("test_y");
  if (tx.dims.empty() || vx.dims.empty()) throw ContainerError(ContainerErrorKind::Invalid, "dataset arrays are empty");
  ds.n_train = tx.dims[0];
  ds.n_test = vx.dims[0];
  check_array(tx, sample_dims(ds, ds.n_train, ds.in_channels));
  check_array(ty, sample_dims(ds, ds.n_train, 1));
  check_array(vx, sample_dims(ds, ds.n_test, ds.in_channels));
  check_array(vy, sample_dims(ds, ds.n_test, 1));
  ds.train_x = tx.values;
  ds.train_y = ty.values;
  ds.test_x = vx.values;
  ds.test_y = vy.values;
  ds.metadata = m;
  return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) { write_container(path, dataset_to_container(ds)); }

Dataset load_dataset(const std::string& path) { return dataset_from_container(read_container(path)); }

Dataset import_raw(const std::string& sidecar_path) {
  std::ifstream in(sidecar_path);
  if (!in) throw ContainerError(ContainerErrorKind::Io, "cannot open sidecar " + sidecar_path);
  json side;
  try {
    side = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sidecar is not valid JSON: ") + e.what());
  }
  const std::set<std::string> allowed{"problem", "grid", "in_channels", "dtype", "n_train", "n_test", "files"};
  for (const auto& [key, value] : side.items())
    if (!allowed.count(key)) throw ConfigError("sidecar: unknown key '" + key + "'");

  Dataset ds;
  std::string dtype;
  json files;
  try {
    ds.problem = side.at("problem").get<std::string>();
    ds.grid = side.at("grid").get<Shape>();
    ds.in_channels = side.value("in_channels", std::size_t{1});
    dtype = side.value("dtype", std::string("f32"));
    ds.n_train = side.at("n_train").get<std::size_t>();
    ds.n_test = side.at("n_test").get<std::size_t>();
    files = side.at("files");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sidecar: ") + e.what());
  }
  if (dtype != "f32" && dtype != "f64") throw ConfigError("sidecar: dtype must be f32 or f64");
  if (ds.grid.empty() || ds.grid.size() > 2) throw ConfigError("sidecar: grid must be 1D or 2D");
  check_counts(ds.n_train, ds.n_test);

  const auto base = std::filesystem::path(sidecar_path).parent_path();
  auto load = [&](const char* key, std::size_t count) {
    if (!files.contains(key)) throw ConfigError(std::string("sidecar: files.") + key + " missing");
    auto values = read_raw(base / files.at(key).get<std::string>(), count, dtype == "f32");
    std::transform(values.begin(), values.end(), values.begin(), to_f32);
    return values;
  };
  const std::size_t p = ds.points();
  ds.train_x = load("train_x", ds.n_train * p * ds.in_channels);
  ds.train_y = load("train_y", ds.n_train * p);
  ds.test_x = load("test_x", ds.n_test * p * ds.in_channels);
  ds.test_y = load("test_y", ds.n_test * p);
  ds.metadata = json{{"generator", "import"}, {"source", side}};
  return ds;
}

Normalization min_max_normalization(const Dataset& ds) {
  if (ds.train_x.empty()) return {};
  const auto [lo, hi] = std::minmax_element(ds.train_x.begin(), ds.train_x.end());
  return {*lo, *hi > *lo ? *hi - *lo : 1.0};
}

Normalization standard_normalization(const Dataset& ds) {
  if (ds.train_x.empty()) return {};
  double mean = 0.0;
  for (double v : ds.train_x) mean += v;
  mean /= static_cast<double>(ds.train_x.size());
  double var = 0.0;
  for (double v : ds.train_x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(ds.train_x.size()));
  return {mean, sd > 0.0 ? sd : 1.0};
}

Normalization input_normalization(const Dataset& ds, neurons::Encoding encoding) {
  return encoding == neurons::Encoding::Direct ? standard_normalization(ds) : min_max_normalization(ds);
}

training::Split to_split(const Dataset& ds, Normalization norm) {
  if (!(norm.scale > 0.0)) throw std::invalid_argument("normalisation scale must be positive");
  Shape xs = ds.grid;
  xs.push_back(ds.in_channels);
  Shape ys = ds.grid;
  ys.push_back(1);
  const std::size_t px = shape_size(xs);
  const std::size_t py = shape_size(ys);
  const double inv = 1.0 / norm.scale;
  auto fill = [&](training::SampleSet& set, const std::vector<double>& x, const std::vector<double>& y,
                  std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> xi(x.begin() + i * px, x.begin() + (i + 1) * px);
      for (double& v : xi) v = (v - norm.shift) * inv;
      set.inputs.push_back(Tensor::from(xs, std::move(xi)));
      set.targets.push_back(Tensor::from(ys, std::vector<double>(y.begin() + i * py, y.begin() + (i + 1) * py)));
    }
  };
  training::Split split;
  fill(split.train, ds.train_x, ds.train_y, ds.n_train);
  fill(split.test, ds.test_x, ds.test_y, ds.n_test);
  return split;
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const std::string& path, const wno::WnoModel& model, Normalization norm, const json& extra) {
  Container c;
  for (const auto& [name, tensor] : model.named_tensors()) {
    const auto values = tensor.data();
    c.arrays.push_back({name, DType::F64, tensor.shape(), std::vector<double>(values.begin(), values.end())});
  }
  c.metadata = extra.is_object() ? extra : json::object();
  c.metadata["kind"] = "checkpoint";
  c.metadata["config"] = to_json(model.config());
  c.metadata["input_normalization"] = {{"shift", norm.shift}, {"scale", norm.scale}};
  write_container(path, c);
}

Checkpoint load_checkpoint(const std::string& path) {
  const Container c = read_container(path);
  if (c.metadata.value("kind", "") != "checkpoint")
    throw ContainerError(ContainerErrorKind::Invalid, path + " does not hold a checkpoint");
  wno::WnoConfig config;
  read_json(c.metadata.at("config"), config, "checkpoint.config");
  Checkpoint ck;
  ck.model = wno::WnoModel(config, 0);
  for (auto& [name, tensor] : ck.model.named_tensors()) {
    const NamedArray& a = c.at(name);
    check_array(a, tensor.shape());
    auto dst = tensor.mutable_data();
    std::copy(a.values.begin(), a.values.end(), dst.begin());
  }
  try {
    const json& n = c.metadata.at("input_normalization");
    ck.norm = {n.at("shift").get<double>(), n.at("scale").get<double>()};
  } catch (const json::exception& e) {
    throw ContainerError(ContainerErrorKind::Invalid, std::string("checkpoint metadata: ") + e.what());
  }
  ck.metadata = c.metadata;
  return ck;
}

}  // namespace vswno::data
