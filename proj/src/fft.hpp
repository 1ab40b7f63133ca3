#pragma once

// Thin RAII wrapper over FFTW real transforms. Plan creation is serialised
// because the FFTW planner is not thread-safe; execution is.

#include <complex>
#include <cstddef>
#include <span>

#include <fftw3.h>

namespace vswno::detail {

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Unnormalised forward transform.
  void forward(std::span<const double> x, std::span<std::complex<double>> spectrum);
  /// Unnormalised inverse: the result is n times the input signal.
  void inverse(std::span<const std::complex<double>> spectrum, std::span<double> x);

 private:
  std::size_t n_;
  double* real_;
  fftw_complex* complex_;
  fftw_plan r2c_;
  fftw_plan c2r_;
};

}  // namespace vswno::detail
