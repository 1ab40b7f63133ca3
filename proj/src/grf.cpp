#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "vswno/data.hpp"
#include "vswno/random.hpp"

namespace vswno::data {

namespace {

// sqrt(c) * (lambda + tau^2)^(-p/2)
double mode_weight(const GrfSpec& spec, double lambda) {
  return std::sqrt(spec.scale) * std::pow(lambda + spec.shift, -spec.exponent / 2.0);
}

double fourier_eigenvalue(std::size_t k) {
  const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
  return w * w;
}

}  // namespace

void GrfSpec::validate() const {
  if (!(scale > 0.0) || !(shift > 0.0) || !(exponent > 0.0))
    throw std::invalid_argument("GRF spec requires scale, shift and exponent > 0");
}

std::vector<double> sample_grf_1d(const GrfSpec& spec, std::size_t n) { return sample_grf_1d(spec, n, n / 2); }

std::vector<double> sample_grf_1d(const GrfSpec& spec, std::size_t n, std::size_t max_mode) {
  spec.validate();
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("sample_grf_1d: n must be even, got " + std::to_string(n));
  Rng rng(spec.seed);
  std::vector<std::complex<double>> spectrum(n / 2 + 1);
  spectrum[0] = mode_weight(spec, 0.0) * rng.normal();
  // f = w0 xi0 + sum_k sqrt(2) w_k (a_k cos + b_k sin); the c2r transform
  // doubles every interior bin, hence the 1/sqrt(2).
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double a = rng.normal();
    const double b = rng.normal();
    if (k > max_mode) continue;
    const double w = mode_weight(spec, fourier_eigenvalue(k)) / std::numbers::sqrt2;
    spectrum[k] = {w * a, -w * b};
  }
  std::vector<double> out(n);
  detail::RealFft fft(n);
  fft.inverse(spectrum, out);
  return out;
}

double grf_1d_variance(const GrfSpec& spec, std::size_t n) {
  double v = std::pow(mode_weight(spec, 0.0), 2);
  for (std::size_t k = 1; k < n / 2; ++k) v += 2.0 * std::pow(mode_weight(spec, fourier_eigenvalue(k)), 2);
  return v;
}

std::vector<double> sample_grf_2d(const GrfSpec& spec, std::size_t h, std::size_t w) {
  spec.validate();
  if (h < 2 || w < 2) throw std::invalid_argument("sample_grf_2d: extents must be at least 2");
  Rng rng(spec.seed);
  const double pi = std::numbers::pi;
  std::vector<double> coeff(h * w);
  for (std::size_t k1 = 0; k1 < h; ++k1) {
    for (std::size_t k2 = 0; k2 < w; ++k2) {
      const double lambda = pi * pi * static_cast<double>(k1 * k1 + k2 * k2);
      coeff[k1 * w + k2] = mode_weight(spec, lambda) * rng.normal();
    }
  }
  auto basis = [&](std::size_t points) {
    std::vector<double> b(points * points);
    for (std::size_t i = 0; i < points; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(points - 1);
      for (std::size_t k = 0; k < points; ++k)
        b[i * points + k] = k == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(pi * static_cast<double>(k) * x);
    }
    return b;
  };
  const auto rows = basis(h);
  const auto cols = basis(w);
  // field = rows * coeff * cols^T
  std::vector<double> tmp(h * w, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t k1 = 0; k1 < h; ++k1) {
      const double r = rows[i * h + k1];
      for (std::size_t k2 = 0; k2 < w; ++k2) tmp[i * w + k2] += r * coeff[k1 * w + k2];
    }
  std::vector<double> field(h * w, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      double s = 0.0;
      for (std::size_t k2 = 0; k2 < w; ++k2) s += tmp[i * w + k2] * cols[j * w + k2];
      field[i * w + j] = s;
    }
  return field;
}

std::vector<double> permeability_pushforward(const std::vector<double>& field) {
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i] > 0.0 ? 12.0 : 3.0;
  return out;
}

}  // namespace vswno::data
