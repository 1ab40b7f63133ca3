#include "fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <new>

namespace vswno::detail {

namespace {
std::mutex g_planner_mutex;
}

RealFft::RealFft(std::size_t n) : n_(n) {
  real_ = fftw_alloc_real(n_);
  complex_ = fftw_alloc_complex(bins());
  if (real_ == nullptr || complex_ == nullptr) throw std::bad_alloc();
  std::lock_guard<std::mutex> lock(g_planner_mutex);
  const int size = static_cast<int>(n_);
  r2c_ = fftw_plan_dft_r2c_1d(size, real_, complex_, FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r_1d(size, complex_, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }
  fftw_free(real_);
  fftw_free(complex_);
}

void RealFft::forward(std::span<const double> x, std::span<std::complex<double>> spectrum) {
  std::copy(x.begin(), x.end(), real_);
  fftw_execute(r2c_);
  std::memcpy(static_cast<void*>(spectrum.data()), complex_, bins() * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<const std::complex<double>> spectrum, std::span<double> x) {
  // c2r destroys its input, so it always works on the private buffer.
  std::memcpy(complex_, spectrum.data(), bins() * sizeof(fftw_complex));
  fftw_execute(c2r_);
  std::copy(real_, real_ + n_, x.begin());
}

}  // namespace vswno::detail
