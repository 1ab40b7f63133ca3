#include <cmath>

#include "vswno/data.hpp"

namespace vswno::data {

namespace {

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

// Matrix-free five-point operator on the full node grid. Boundary entries of
// `u` are ignored and boundary entries of `out` are set to zero.
struct DarcyOperator {
  std::size_t h, w;
  double inv_hx2, inv_hy2;
  std::vector<double> north, south, west, east, diag;

  DarcyOperator(const std::vector<double>& a, std::size_t h_, std::size_t w_)
      : h(h_), w(w_), north(h_ * w_), south(h_ * w_), west(h_ * w_), east(h_ * w_), diag(h_ * w_, 1.0) {
    const double hx = 1.0 / static_cast<double>(h - 1);
    const double hy = 1.0 / static_cast<double>(w - 1);
    inv_hx2 = 1.0 / (hx * hx);
    inv_hy2 = 1.0 / (hy * hy);
    for (std::size_t i = 1; i + 1 < h; ++i) {
      for (std::size_t j = 1; j + 1 < w; ++j) {
        const std::size_t p = i * w + j;
        north[p] = harmonic(a[p], a[p - w]) * inv_hx2;
        south[p] = harmonic(a[p], a[p + w]) * inv_hx2;
        west[p] = harmonic(a[p], a[p - 1]) * inv_hy2;
        east[p] = harmonic(a[p], a[p + 1]) * inv_hy2;
        diag[p] = north[p] + south[p] + west[p] + east[p];
      }
    }
  }

  bool interior(std::size_t i, std::size_t j) const { return i > 0 && j > 0 && i + 1 < h && j + 1 < w; }

  double at(const std::vector<double>& u, std::size_t i, std::size_t j) const {
    return interior(i, j) ? u[i * w + j] : 0.0;
  }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 1; i + 1 < h; ++i) {
      for (std::size_t j = 1; j + 1 < w; ++j) {
        const std::size_t p = i * w + j;
        out[p] = diag[p] * u[p] - north[p] * at(u, i - 1, j) - south[p] * at(u, i + 1, j) -
                 west[p] * at(u, i, j - 1) - east[p] * at(u, i, j + 1);
      }
    }
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_inputs(const std::vector<double>& a, std::size_t h, std::size_t w) {
  if (h < 3 || w < 3) throw std::invalid_argument("darcy_solve_rect: grid must be at least 3x3");
  if (a.size() != h * w) throw std::invalid_argument("darcy_solve_rect: permeability size does not match grid");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0))
      throw std::invalid_argument("darcy_solve_rect: nonpositive permeability at node " + std::to_string(i));
  }
}

std::vector<double> source_vector(std::size_t h, std::size_t w, double f) {
  std::vector<double> b(h * w, 0.0);
  for (std::size_t i = 1; i + 1 < h; ++i)
    for (std::size_t j = 1; j + 1 < w; ++j) b[i * w + j] = f;
  return b;
}

}  // namespace

double darcy_residual(const std::vector<double>& a, std::size_t h, std::size_t w, double f,
                      const std::vector<double>& u) {
  check_inputs(a, h, w);
  const DarcyOperator op(a, h, w);
  const auto b = source_vector(h, w, f);
  std::vector<double> au(h * w);
  op.apply(u, au);
  double num = 0.0;
  for (std::size_t i = 0; i < au.size(); ++i) num += (b[i] - au[i]) * (b[i] - au[i]);
  const double den = dot(b, b);
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

DarcyResult darcy_solve_rect(const std::vector<double>& a, std::size_t h, std::size_t w, double f, double tol,
                             std::size_t max_iterations) {
  check_inputs(a, h, w);
  const DarcyOperator op(a, h, w);
  const auto b = source_vector(h, w, f);
  const std::size_t cap = max_iterations > 0 ? max_iterations : 10 * h * w;
  const double b_norm = std::sqrt(dot(b, b));

  DarcyResult result;
  result.u.assign(h * w, 0.0);
  if (b_norm == 0.0) return result;

  std::vector<double> r(h * w), z(h * w), p(h * w), ap(h * w);
  // Restarted from the true residual so the returned residual is the real one.
  for (;;) {
    op.apply(result.u, ap);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - ap[i];
    result.relative_residual = std::sqrt(dot(r, r)) / b_norm;
    if (result.relative_residual < tol) return result;
    if (result.iterations >= cap) break;

    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / op.diag[i];
    p = z;
    double rz = dot(r, z);
    while (result.iterations < cap) {
      op.apply(p, ap);
      const double alpha = rz / dot(p, ap);
      for (std::size_t i = 0; i < r.size(); ++i) {
        result.u[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      ++result.iterations;
      if (std::sqrt(dot(r, r)) / b_norm < 0.1 * tol) break;
      for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / op.diag[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
  }
  throw SolverError("darcy_solve_rect: CG did not converge in " + std::to_string(cap) +
                    " iterations (relative residual " + std::to_string(result.relative_residual) + ")");
}

}  // namespace vswno::data
