#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "vswno/data.hpp"

namespace vswno::data {

using cplx = std::complex<double>;

double burgers_time_step(const std::vector<double>& u0, double t_end) {
  const double dx = 1.0 / static_cast<double>(u0.size());
  double umax = 0.0;
  for (double v : u0) umax = std::max(umax, std::abs(v));
  if (umax == 0.0) return t_end;
  const double steps = std::ceil(t_end / (0.5 * dx / umax));
  return t_end / steps;
}

std::vector<double> burgers_solve(const std::vector<double>& u0, double nu, double t_end) {
  const std::size_t n = u0.size();
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("burgers_solve: n must be even and >= 4");
  if (!(nu > 0.0)) throw std::invalid_argument("burgers_solve: viscosity must be positive");
  if (!(t_end > 0.0)) throw std::invalid_argument("burgers_solve: t_end must be positive");

  const double dt = burgers_time_step(u0, t_end);
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  detail::RealFft fft(n);
  const std::size_t bins = fft.bins();
  const double inv_n = 1.0 / static_cast<double>(n);

  // 2/3 rule, derivative factor for -(u^2/2)_x, and integrating factors.
  std::vector<double> mask(bins), e_half(bins), e_full(bins);
  std::vector<cplx> g(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double wave = 2.0 * std::numbers::pi * static_cast<double>(k);
    mask[k] = 3 * k <= n ? 1.0 : 0.0;
    g[k] = k == n / 2 ? cplx{} : cplx{0.0, -0.5 * wave};
    e_half[k] = std::exp(-nu * wave * wave * dt / 2.0);
    e_full[k] = e_half[k] * e_half[k];
  }

  std::vector<double> phys(n);
  std::vector<cplx> v(bins), a(bins), b(bins), c(bins), d(bins), tmp(bins);
  fft.forward(u0, v);

  auto nonlinear = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    for (std::size_t k = 0; k < bins; ++k) tmp[k] = in[k] * mask[k];
    fft.inverse(tmp, phys);
    for (double& p : phys) {
      p *= inv_n;
      p *= p;
    }
    fft.forward(phys, out);
    for (std::size_t k = 0; k < bins; ++k) out[k] *= g[k] * mask[k];
  };

  std::vector<cplx> stage(bins);
  for (std::size_t step = 0; step < steps; ++step) {
    nonlinear(v, a);
    for (std::size_t k = 0; k < bins; ++k) stage[k] = e_half[k] * (v[k] + 0.5 * dt * a[k]);
    nonlinear(stage, b);
    for (std::size_t k = 0; k < bins; ++k) stage[k] = e_half[k] * v[k] + 0.5 * dt * b[k];
    nonlinear(stage, c);
    for (std::size_t k = 0; k < bins; ++k) stage[k] = e_full[k] * v[k] + dt * e_half[k] * c[k];
    nonlinear(stage, d);
    bool finite = true;
    for (std::size_t k = 0; k < bins; ++k) {
      v[k] = e_full[k] * v[k] + dt / 6.0 * (e_full[k] * a[k] + 2.0 * e_half[k] * (b[k] + c[k]) + d[k]);
      finite = finite && std::isfinite(v[k].real()) && std::isfinite(v[k].imag());
    }
    if (!finite) throw SolverError("burgers_solve: non-finite state at step " + std::to_string(step + 1));
  }

  std::vector<double> out(n);
  fft.inverse(v, out);
  for (double& x : out) x *= inv_n;
  return out;
}

std::vector<double> spectral_resample(const std::vector<double>& u, std::size_t n) {
  const std::size_t m = u.size();
  if (m % 2 != 0 || n % 2 != 0 || n < m) throw std::invalid_argument("spectral_resample: need even sizes with n >= m");
  detail::RealFft coarse(m);
  detail::RealFft fine(n);
  std::vector<cplx> src(coarse.bins());
  coarse.forward(u, src);
  std::vector<cplx> dst(fine.bins());
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k];
  // The coarse Nyquist bin is shared between +m/2 and -m/2 on the fine grid.
  if (n > m) dst[m / 2] *= 0.5;
  std::vector<double> out(n);
  fine.inverse(dst, out);
  for (double& x : out) x /= static_cast<double>(m);
  return out;
}

}  // namespace vswno::data
