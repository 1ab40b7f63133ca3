#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vswno/operator.hpp"
#include "vswno/tensor.hpp"
#include "vswno/training.hpp"

namespace vswno::data {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Gaussian random fields, covariance c (-Laplacian + tau^2 I)^(-p)

enum class GrfBasis { FourierPeriodic, CosineNeumann };

struct GrfSpec {
  double scale = 625.0;  // c
  double shift = 25.0;   // tau^2
  double exponent = 2.0; // p
  GrfBasis basis = GrfBasis::FourierPeriodic;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Periodic draw on x_j = j / n. Modes 0 .. n/2 - 1 (Nyquist excluded).
std::vector<double> sample_grf_1d(const GrfSpec& spec, std::size_t n);
/// Same draw restricted to |k| <= max_mode.
std::vector<double> sample_grf_1d(const GrfSpec& spec, std::size_t n, std::size_t max_mode);
/// Exact pointwise variance of sample_grf_1d.
double grf_1d_variance(const GrfSpec& spec, std::size_t n);

/// Neumann cosine draw on the closed unit square, nodes x_i = i / (h - 1).
std::vector<double> sample_grf_2d(const GrfSpec& spec, std::size_t h, std::size_t w);
/// 12 where field > 0, 3 elsewhere.
std::vector<double> permeability_pushforward(const std::vector<double>& field);

// ---------------------------------------------------------------------------
// Solvers

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Viscous Burgers on the periodic unit interval.
std::vector<double> burgers_solve(const std::vector<double>& u0, double nu, double t_end);
/// Time step used by burgers_solve for this initial condition.
double burgers_time_step(const std::vector<double>& u0, double t_end);
/// Trigonometric interpolation of a periodic sample onto a finer even grid.
std::vector<double> spectral_resample(const std::vector<double>& u, std::size_t n);

struct DarcyResult {
  std::vector<double> u;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// -div(a grad u) = f on the unit square, u = 0 on the boundary; a given at
/// the h x w nodes.
DarcyResult darcy_solve_rect(const std::vector<double>& a, std::size_t h, std::size_t w, double f,
                             double tol = 1e-10, std::size_t max_iterations = 0);
/// ||A u - f|| / ||f|| over interior nodes.
double darcy_residual(const std::vector<double>& a, std::size_t h, std::size_t w, double f,
                      const std::vector<double>& u);

// ---------------------------------------------------------------------------
// Container

enum class ContainerErrorKind { BadMagic, BadVersion, Truncated, UnknownDtype, Io, Invalid };

class ContainerError : public std::runtime_error {
 public:
  ContainerError(ContainerErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ContainerErrorKind kind() const { return kind_; }

 private:
  ContainerErrorKind kind_;
};

enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

struct NamedArray {
  std::string name;
  DType dtype = DType::F64;
  Shape dims;
  std::vector<double> values;  // F32 arrays hold float-representable values
};

struct Container {
  std::vector<NamedArray> arrays;
  json metadata = json::object();

  const NamedArray* find(const std::string& name) const;
  const NamedArray& at(const std::string& name) const;
};

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 12;

std::vector<std::uint8_t> encode_container(const Container& c);
Container decode_container(const std::vector<std::uint8_t>& bytes);
/// Written to a sibling temporary file, then renamed into place.
void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  std::string problem;
  Shape grid;
  std::size_t in_channels = 1;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<double> train_x, train_y, test_x, test_y;
  json metadata = json::object();

  std::size_t points() const;
};

struct BurgersSpec {
  std::size_t n = 1024;
  double nu = 0.1;
  double t_end = 1.0;
  GrfSpec grf{625.0, 25.0, 2.0, GrfBasis::FourierPeriodic, 0};
  std::size_t n_train = 1000;
  std::size_t n_test = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DarcySpec {
  std::size_t h = 85;
  std::size_t w = 85;
  double source = 1.0;
  GrfSpec grf{1.0, 9.0, 2.0, GrfBasis::CosineNeumann, 0};
  std::size_t n_train = 1000;
  std::size_t n_test = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draws are seeded per sample index, so results do not depend on `threads`.
Dataset generate_burgers(const BurgersSpec& spec, std::size_t threads = 1);
Dataset generate_darcy(const DarcySpec& spec, std::size_t threads = 1);

Container dataset_to_container(const Dataset& ds);
Dataset dataset_from_container(const Container& c);
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

/// Raw little-endian binaries described by a JSON sidecar:
/// {"problem", "grid", "in_channels", "dtype": "f32"|"f64", "n_train", "n_test",
///  "files": {"train_x", "train_y", "test_x", "test_y"}} (paths relative to the sidecar).
Dataset import_raw(const std::string& sidecar_path);

/// x' = (x - shift) / scale, one scalar pair per dataset.
struct Normalization {
  double shift = 0.0;
  double scale = 1.0;
};
/// Training inputs mapped onto [0, 1] (min/max).
Normalization min_max_normalization(const Dataset& ds);
/// Training inputs mapped to zero mean, unit variance.
Normalization standard_normalization(const Dataset& ds);
/// Rate and triangular encodings need [0, 1] inputs; direct encoding uses
/// the standard score.
Normalization input_normalization(const Dataset& ds, neurons::Encoding encoding);
/// Inputs normalised; targets unchanged.
training::Split to_split(const Dataset& ds, Normalization norm);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  wno::WnoModel model;
  Normalization norm;
  json metadata = json::object();
};

void save_checkpoint(const std::string& path, const wno::WnoModel& model, Normalization norm, const json& extra);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace vswno::data
