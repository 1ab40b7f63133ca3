#pragma once

// Reference computations shared by the test suites. Nothing here calls into
// the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "vswno/random.hpp"
#include "vswno/tensor.hpp"

namespace oracle {

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  vswno::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Central differences of `loss` with respect to every entry of `param`.
inline std::vector<double> central_difference(const std::function<double()>& loss, vswno::Tensor& param,
                                              double h = 1e-6) {
  auto values = param.mutable_data();
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double up = loss();
    values[i] = keep - h;
    const double down = loss();
    values[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Largest relative error between analytic and numeric gradients, measured
/// against the gradient scale of the tensor.
inline double gradient_mismatch(std::span<const double> analytic, const std::vector<double>& numeric) {
  double scale = 0.0;
  for (double v : numeric) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(scale, 1e-12));
  return worst;
}

/// Plain-loop leaky integrate-and-fire recurrence for one element.
struct LifTrace {
  std::vector<double> spikes;
  double membrane = 0.0;
};

inline LifTrace lif_recurrence(double beta, double threshold, const std::vector<double>& z) {
  LifTrace out;
  double m = 0.0;
  for (double zt : z) {
    m = beta * m + zt;
    const double s = (m - threshold >= 0.0) ? 1.0 : 0.0;
    if (s == 1.0) m = 0.0;
    out.spikes.push_back(s);
  }
  out.membrane = m;
  return out;
}

inline double gelu_tanh(double x) {
  const double c = std::sqrt(2.0 / M_PI);
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

/// Periodic single-level orthonormal analysis written as an explicit matrix
/// product: row i of the low band is the filter laid out at offset 2i+1.
inline void periodic_level(const std::vector<double>& lo_filter, const std::vector<double>& hi_filter,
                           const std::vector<double>& x, std::vector<double>& lo, std::vector<double>& hi) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < half; ++i)
    for (std::size_t j = 0; j < lo_filter.size(); ++j) {
      const std::size_t col = ((2 * i + 1 + n * lo_filter.size()) - j) % n;
      matrix[i][col] += lo_filter[j];
      matrix[half + i][col] += hi_filter[j];
    }
  lo.assign(half, 0.0);
  hi.assign(half, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += matrix[r][c] * x[c];
    (r < half ? lo[r] : hi[r - half]) = acc;
  }
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("vswno_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
