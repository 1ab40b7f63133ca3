#include "vswno/wavelet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace vswno::wavelet {

namespace {

// Daubechies decomposition low-pass filters (scaling coefficients, reversed),
// as tabulated in the standard references.
const std::map<std::string, std::vector<double>, std::less<>>& dec_lo_tables() {
  static const std::map<std::string, std::vector<double>, std::less<>> tables = {
      {"db2", {-0.12940952255126037, 0.2241438680420134, 0.8365163037378079, 0.48296291314453416}},
      {"db3",
       {0.03522629188570953, -0.08544127388202666, -0.13501102001025458, 0.45987750211849154, 0.8068915093110925,
        0.33267055295008263}},
      {"db4",
       {-0.010597401785069032, 0.0328830116668852, 0.030841381835560764, -0.18703481171909309, -0.027983769416859854,
        0.6308807679298589, 0.7148465705529157, 0.2303778133088965}},
      {"db5",
       {0.0033357252854737712, -0.012580751999081999, -0.006241490212798274, 0.07757149384004572,
        -0.032244869584638375, -0.24229488706638203, 0.13842814590132074, 0.7243085284377729, 0.6038292697971896,
        0.16010239797419293}},
      {"db6",
       {-0.0010773010853084796, 0.004777257510945511, 0.0005538422011614961, -0.03158203931748603,
        0.027522865530305727, 0.09750160558732304, -0.12976686756726194, -0.22626469396543983, 0.31525035170919763,
        0.7511339080210954, 0.49462389039845306, 0.11154074335010947}},
  };
  return tables;
}

WaveletFilter build_filter(const std::string& name, const std::vector<double>& dec_lo) {
  WaveletFilter f;
  f.name = name;
  f.dec_lo = dec_lo;
  const std::size_t n = dec_lo.size();
  f.dec_hi.resize(n);
  for (std::size_t k = 0; k < n; ++k) f.dec_hi[k] = (k % 2 == 0 ? 1.0 : -1.0) * dec_lo[n - 1 - k];
  f.rec_lo.assign(f.dec_lo.rbegin(), f.dec_lo.rend());
  f.rec_hi.assign(f.dec_hi.rbegin(), f.dec_hi.rend());
  return f;
}

inline std::size_t extend_index(std::ptrdiff_t idx, std::size_t n, ExtensionMode mode) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  if (mode == ExtensionMode::Periodic) return static_cast<std::size_t>(((idx % sn) + sn) % sn);
  const std::ptrdiff_t period = 2 * sn;
  std::ptrdiff_t r = ((idx % period) + period) % period;
  return static_cast<std::size_t>(r < sn ? r : period - 1 - r);
}

void check_step_sizes(const WaveletFilter& f, ExtensionMode mode, std::size_t n, std::size_t lo, std::size_t hi,
                      const char* where) {
  const std::size_t expected = coefficient_length(n, f.taps(), mode);
  if (lo != expected || (hi != 0 && hi != expected)) {
    throw WaveletError(std::string(where) + ": band length " + std::to_string(lo) + " inconsistent with signal length " +
                       std::to_string(n) + " (expected " + std::to_string(expected) + ")");
  }
}

// Column helpers for the separable 2D transform.
void gather_column(const std::vector<double>& field, std::size_t rows, std::size_t cols, std::size_t c,
                   std::vector<double>& line) {
  line.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) line[r] = field[r * cols + c];
}

void scatter_column(std::vector<double>& field, std::size_t cols, std::size_t c, std::span<const double> line,
                    bool accumulate) {
  for (std::size_t r = 0; r < line.size(); ++r) {
    if (accumulate)
      field[r * cols + c] += line[r];
    else
      field[r * cols + c] = line[r];
  }
}

Field2d make_field(std::size_t rows, std::size_t cols) { return Field2d{rows, cols, std::vector<double>(rows * cols)}; }

bool is_empty(const Field2d& f) { return f.values.empty(); }

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

}  // namespace

std::string_view mode_name(ExtensionMode mode) {
  return mode == ExtensionMode::Periodic ? "periodic" : "symmetric";
}

ExtensionMode parse_mode(std::string_view name) {
  if (name == "periodic") return ExtensionMode::Periodic;
  if (name == "symmetric") return ExtensionMode::Symmetric;
  throw WaveletError("unknown extension mode '" + std::string(name) + "'");
}

void validate_filter(const WaveletFilter& f, double tol) {
  const std::size_t n = f.taps();
  auto fail = [&](const std::string& what) { throw WaveletError("filter " + f.name + ": " + what); };
  if (n < 2 || n % 2 != 0 || f.dec_hi.size() != n || f.rec_lo.size() != n || f.rec_hi.size() != n)
    fail("inconsistent tap counts");
  for (std::size_t shift = 0; shift < n; shift += 2) {
    double dot = 0.0;
    for (std::size_t k = 0; k + shift < n; ++k) dot += f.dec_lo[k] * f.dec_lo[k + shift];
    if (std::abs(dot - (shift == 0 ? 1.0 : 0.0)) > tol) fail("low-pass filter is not orthonormal");
  }
  double hi_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double mirror = (k % 2 == 0 ? 1.0 : -1.0) * f.dec_lo[n - 1 - k];
    if (std::abs(f.dec_hi[k] - mirror) > tol) fail("quadrature-mirror relation violated");
    if (f.rec_lo[k] != f.dec_lo[n - 1 - k] || f.rec_hi[k] != f.dec_hi[n - 1 - k])
      fail("reconstruction filters are not time-reversed decomposition filters");
    hi_sum += f.dec_hi[k];
  }
  if (std::abs(hi_sum) > tol) fail("high-pass filter has no vanishing moment");
}

const WaveletFilter& daubechies(std::string_view name) {
  static std::map<std::string, WaveletFilter, std::less<>> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  const auto& tables = dec_lo_tables();
  const auto table = tables.find(name);
  if (table == tables.end()) throw WaveletError("unknown wavelet '" + std::string(name) + "'");
  WaveletFilter f = build_filter(table->first, table->second);
  validate_filter(f);
  return cache.emplace(table->first, std::move(f)).first->second;
}

std::vector<std::string> available_filters() {
  std::vector<std::string> names;
  for (const auto& [name, _] : dec_lo_tables()) names.push_back(name);
  return names;
}

std::size_t coefficient_length(std::size_t n, std::size_t taps, ExtensionMode mode) {
  return mode == ExtensionMode::Periodic ? n / 2 : (n + taps - 1) / 2;
}

std::vector<std::size_t> level_extents(std::size_t n, std::size_t taps, ExtensionMode mode, std::size_t levels) {
  if (levels < 1) throw WaveletError("decomposition needs at least one level");
  std::vector<std::size_t> extents{n};
  for (std::size_t level = 1; level <= levels; ++level) {
    const std::size_t cur = extents.back();
    const bool ok = mode == ExtensionMode::Periodic ? (cur >= 2 && cur % 2 == 0) : cur + 1 >= taps;
    if (!ok) {
      throw WaveletError("level " + std::to_string(level) + " of " + std::to_string(levels) +
                         " cannot be decomposed: input length " + std::to_string(cur) + " (" +
                         std::string(mode_name(mode)) + " mode, " + std::to_string(taps) + " taps)");
    }
    if (level < levels) extents.push_back(coefficient_length(cur, taps, mode));
  }
  return extents;
}

// ---------------------------------------------------------------------------
// 1D steps

void analysis_step(const WaveletFilter& f, ExtensionMode mode, std::span<const double> in, std::span<double> lo,
                   std::span<double> hi) {
  const std::size_t n = in.size();
  check_step_sizes(f, mode, n, lo.size(), hi.size(), "analysis_step");
  const std::size_t taps = f.taps();
  const double* hlo = f.dec_lo.data();
  const double* hhi = f.dec_hi.data();
  const bool with_hi = !hi.empty();
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const std::size_t base = 2 * i + 1;
    double slo = 0.0;
    double shi = 0.0;
    if (base + 1 >= taps && base < n) {
      const double* x = in.data() + base;
      for (std::size_t j = 0; j < taps; ++j) {
        slo += hlo[j] * x[-static_cast<std::ptrdiff_t>(j)];
        if (with_hi) shi += hhi[j] * x[-static_cast<std::ptrdiff_t>(j)];
      }
    } else {
      for (std::size_t j = 0; j < taps; ++j) {
        const double v = in[extend_index(static_cast<std::ptrdiff_t>(base) - static_cast<std::ptrdiff_t>(j), n, mode)];
        slo += hlo[j] * v;
        if (with_hi) shi += hhi[j] * v;
      }
    }
    lo[i] = slo;
    if (with_hi) hi[i] = shi;
  }
}

void analysis_step_adjoint(const WaveletFilter& f, ExtensionMode mode, std::span<const double> lo_grad,
                           std::span<const double> hi_grad, std::span<double> in_grad) {
  const std::size_t n = in_grad.size();
  check_step_sizes(f, mode, n, lo_grad.size(), hi_grad.size(), "analysis_step_adjoint");
  const std::size_t taps = f.taps();
  const bool with_hi = !hi_grad.empty();
  for (std::size_t i = 0; i < lo_grad.size(); ++i) {
    const auto base = static_cast<std::ptrdiff_t>(2 * i + 1);
    const double gl = lo_grad[i];
    const double gh = with_hi ? hi_grad[i] : 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      in_grad[extend_index(base - static_cast<std::ptrdiff_t>(j), n, mode)] += f.dec_lo[j] * gl + f.dec_hi[j] * gh;
    }
  }
}

void synthesis_step(const WaveletFilter& f, ExtensionMode mode, std::span<const double> lo, std::span<const double> hi,
                    std::span<double> out) {
  const std::size_t n = out.size();
  check_step_sizes(f, mode, n, lo.size(), hi.size(), "synthesis_step");
  const std::size_t taps = f.taps();
  const bool with_hi = !hi.empty();
  std::fill(out.begin(), out.end(), 0.0);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    // Upsample-and-convolve with the reconstruction filters.
    const std::ptrdiff_t start = 2 * static_cast<std::ptrdiff_t>(i) + 2 - static_cast<std::ptrdiff_t>(taps);
    const double a = lo[i];
    const double d = with_hi ? hi[i] : 0.0;
    if (start >= 0 && start + static_cast<std::ptrdiff_t>(taps) <= sn) {
      double* o = out.data() + start;
      for (std::size_t k = 0; k < taps; ++k) o[k] += f.rec_lo[k] * a + f.rec_hi[k] * d;
      continue;
    }
    for (std::size_t k = 0; k < taps; ++k) {
      const std::ptrdiff_t pos = start + static_cast<std::ptrdiff_t>(k);
      if (mode == ExtensionMode::Symmetric && (pos < 0 || pos >= sn)) continue;
      out[extend_index(pos, n, mode)] += f.rec_lo[k] * a + f.rec_hi[k] * d;
    }
  }
}

void synthesis_step_adjoint(const WaveletFilter& f, ExtensionMode mode, std::span<const double> out_grad,
                            std::span<double> lo_grad, std::span<double> hi_grad) {
  const std::size_t n = out_grad.size();
  check_step_sizes(f, mode, n, lo_grad.size(), hi_grad.size(), "synthesis_step_adjoint");
  const std::size_t taps = f.taps();
  const bool with_hi = !hi_grad.empty();
  const auto sn = static_cast<std::ptrdiff_t>(n);
  for (std::size_t i = 0; i < lo_grad.size(); ++i) {
    const std::ptrdiff_t start = 2 * static_cast<std::ptrdiff_t>(i) + 2 - static_cast<std::ptrdiff_t>(taps);
    double gl = 0.0;
    double gh = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      const std::ptrdiff_t pos = start + static_cast<std::ptrdiff_t>(k);
      if (mode == ExtensionMode::Symmetric && (pos < 0 || pos >= sn)) continue;
      const double g = out_grad[extend_index(pos, n, mode)];
      gl += f.rec_lo[k] * g;
      gh += f.rec_hi[k] * g;
    }
    lo_grad[i] += gl;
    if (with_hi) hi_grad[i] += gh;
  }
}

// ---------------------------------------------------------------------------
// 2D steps

Bands2d analysis_step_2d(const WaveletFilter& f, ExtensionMode mode, const Field2d& in, bool with_details) {
  const std::size_t rows = in.rows;
  const std::size_t cols = in.cols;
  const std::size_t bcols = coefficient_length(cols, f.taps(), mode);
  const std::size_t brows = coefficient_length(rows, f.taps(), mode);

  Field2d xl = make_field(rows, bcols);
  Field2d xh = with_details ? make_field(rows, bcols) : Field2d{};
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> row(in.values.data() + r * cols, cols);
    std::span<double> hi = with_details ? std::span<double>(xh.values.data() + r * bcols, bcols) : std::span<double>{};
    analysis_step(f, mode, row, std::span<double>(xl.values.data() + r * bcols, bcols), hi);
  }

  Bands2d out;
  out.ll = make_field(brows, bcols);
  if (with_details) {
    out.lh = make_field(brows, bcols);
    out.hl = make_field(brows, bcols);
    out.hh = make_field(brows, bcols);
  }
  std::vector<double> line, lo(brows), hi(brows);
  for (std::size_t c = 0; c < bcols; ++c) {
    gather_column(xl.values, rows, bcols, c, line);
    analysis_step(f, mode, line, lo, with_details ? std::span<double>(hi) : std::span<double>{});
    scatter_column(out.ll.values, bcols, c, lo, false);
    if (!with_details) continue;
    scatter_column(out.hl.values, bcols, c, hi, false);
    gather_column(xh.values, rows, bcols, c, line);
    analysis_step(f, mode, line, lo, hi);
    scatter_column(out.lh.values, bcols, c, lo, false);
    scatter_column(out.hh.values, bcols, c, hi, false);
  }
  return out;
}

void analysis_step_2d_adjoint(const WaveletFilter& f, ExtensionMode mode, const Bands2d& grad, Field2d& in_grad) {
  const std::size_t rows = in_grad.rows;
  const std::size_t cols = in_grad.cols;
  const std::size_t brows = grad.ll.rows;
  const std::size_t bcols = grad.ll.cols;
  const bool with_details = !is_empty(grad.lh);

  Field2d xl = make_field(rows, bcols);
  Field2d xh = with_details ? make_field(rows, bcols) : Field2d{};
  std::vector<double> glo, ghi, line(rows);
  for (std::size_t c = 0; c < bcols; ++c) {
    gather_column(grad.ll.values, brows, bcols, c, glo);
    std::fill(line.begin(), line.end(), 0.0);
    if (with_details) {
      gather_column(grad.hl.values, brows, bcols, c, ghi);
      analysis_step_adjoint(f, mode, glo, ghi, line);
    } else {
      analysis_step_adjoint(f, mode, glo, {}, line);
    }
    scatter_column(xl.values, bcols, c, line, false);
    if (!with_details) continue;
    gather_column(grad.lh.values, brows, bcols, c, glo);
    gather_column(grad.hh.values, brows, bcols, c, ghi);
    std::fill(line.begin(), line.end(), 0.0);
    analysis_step_adjoint(f, mode, glo, ghi, line);
    scatter_column(xh.values, bcols, c, line, false);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> gl(xl.values.data() + r * bcols, bcols);
    std::span<const double> gh =
        with_details ? std::span<const double>(xh.values.data() + r * bcols, bcols) : std::span<const double>{};
    analysis_step_adjoint(f, mode, gl, gh, std::span<double>(in_grad.values.data() + r * cols, cols));
  }
}

Field2d synthesis_step_2d(const WaveletFilter& f, ExtensionMode mode, const Bands2d& bands, std::size_t rows,
                          std::size_t cols) {
  const std::size_t brows = bands.ll.rows;
  const std::size_t bcols = bands.ll.cols;
  const bool with_details = !is_empty(bands.lh);
  Field2d xl = make_field(rows, bcols);
  Field2d xh = with_details ? make_field(rows, bcols) : Field2d{};
  std::vector<double> lo, hi, line(rows);
  for (std::size_t c = 0; c < bcols; ++c) {
    gather_column(bands.ll.values, brows, bcols, c, lo);
    if (with_details) {
      gather_column(bands.hl.values, brows, bcols, c, hi);
      synthesis_step(f, mode, lo, hi, line);
    } else {
      synthesis_step(f, mode, lo, {}, line);
    }
    scatter_column(xl.values, bcols, c, line, false);
    if (!with_details) continue;
    gather_column(bands.lh.values, brows, bcols, c, lo);
    gather_column(bands.hh.values, brows, bcols, c, hi);
    synthesis_step(f, mode, lo, hi, line);
    scatter_column(xh.values, bcols, c, line, false);
  }
  Field2d out = make_field(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> l(xl.values.data() + r * bcols, bcols);
    std::span<const double> h =
        with_details ? std::span<const double>(xh.values.data() + r * bcols, bcols) : std::span<const double>{};
    synthesis_step(f, mode, l, h, std::span<double>(out.values.data() + r * cols, cols));
  }
  return out;
}

Bands2d synthesis_step_2d_adjoint(const WaveletFilter& f, ExtensionMode mode, const Field2d& out_grad,
                                  std::size_t band_rows, std::size_t band_cols, bool with_details) {
  const std::size_t rows = out_grad.rows;
  const std::size_t cols = out_grad.cols;
  Field2d xl = make_field(rows, band_cols);
  Field2d xh = with_details ? make_field(rows, band_cols) : Field2d{};
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> g(out_grad.values.data() + r * cols, cols);
    std::span<double> h =
        with_details ? std::span<double>(xh.values.data() + r * band_cols, band_cols) : std::span<double>{};
    synthesis_step_adjoint(f, mode, g, std::span<double>(xl.values.data() + r * band_cols, band_cols), h);
  }
  Bands2d out;
  out.ll = make_field(band_rows, band_cols);
  if (with_details) {
    out.lh = make_field(band_rows, band_cols);
    out.hl = make_field(band_rows, band_cols);
    out.hh = make_field(band_rows, band_cols);
  }
  std::vector<double> line, lo(band_rows), hi(band_rows);
  for (std::size_t c = 0; c < band_cols; ++c) {
    gather_column(xl.values, rows, band_cols, c, line);
    std::fill(lo.begin(), lo.end(), 0.0);
    std::fill(hi.begin(), hi.end(), 0.0);
    synthesis_step_adjoint(f, mode, line, lo, with_details ? std::span<double>(hi) : std::span<double>{});
    scatter_column(out.ll.values, band_cols, c, lo, false);
    if (!with_details) continue;
    scatter_column(out.hl.values, band_cols, c, hi, false);
    gather_column(xh.values, rows, band_cols, c, line);
    std::fill(lo.begin(), lo.end(), 0.0);
    std::fill(hi.begin(), hi.end(), 0.0);
    synthesis_step_adjoint(f, mode, line, lo, hi);
    scatter_column(out.lh.values, band_cols, c, lo, false);
    scatter_column(out.hh.values, band_cols, c, hi, false);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multilevel transforms

WaveletCoefficients dwt1d(std::span<const double> signal, const WaveletFilter& filter, std::size_t levels,
                          ExtensionMode mode) {
  const auto extents = level_extents(signal.size(), filter.taps(), mode, levels);
  WaveletCoefficients out;
  out.filter = filter.name;
  out.mode = mode;
  out.levels = levels;
  out.details.resize(levels);
  std::vector<double> current(signal.begin(), signal.end());
  for (std::size_t level = 1; level <= levels; ++level) {
    out.length_ledger.push_back({extents[level - 1]});
    const std::size_t len = coefficient_length(current.size(), filter.taps(), mode);
    std::vector<double> lo(len), hi(len);
    analysis_step(filter, mode, current, lo, hi);
    out.details[levels - level] = DetailLevel{{len}, {std::move(hi)}};
    current = std::move(lo);
  }
  out.approx_shape = {current.size()};
  out.approx = std::move(current);
  return out;
}

namespace {

void check_coefficients(const WaveletCoefficients& c, const WaveletFilter& filter, std::size_t rank) {
  auto fail = [](const std::string& what) { throw WaveletError("inconsistent wavelet coefficients: " + what); };
  if (c.rank() != rank) fail("expected rank " + std::to_string(rank));
  if (c.levels < 1 || c.details.size() != c.levels || c.length_ledger.size() != c.levels)
    fail("level count does not match detail bands or length ledger");
  if (!c.filter.empty() && c.filter != filter.name) fail("decomposed with " + c.filter + ", not " + filter.name);
  std::vector<std::size_t> band_shape;
  for (std::size_t level = 1; level <= c.levels; ++level) {
    const auto& ledger = c.length_ledger[level - 1];
    if (ledger.size() != rank) fail("ledger entry rank");
    band_shape.clear();
    for (auto e : ledger) band_shape.push_back(coefficient_length(e, filter.taps(), c.mode));
    const auto& detail = c.details[c.levels - level];
    if (detail.shape != band_shape) fail("detail band shape at level " + std::to_string(level));
    if (detail.bands.size() != (rank == 1 ? 1u : 3u)) fail("detail band count at level " + std::to_string(level));
    for (const auto& b : detail.bands)
      if (b.size() != shape_product(band_shape)) fail("detail band size at level " + std::to_string(level));
  }
  if (c.approx_shape != band_shape || c.approx.size() != shape_product(band_shape)) fail("approximation band shape");
}

}  // namespace

std::vector<double> idwt1d(const WaveletCoefficients& coeffs, const WaveletFilter& filter) {
  check_coefficients(coeffs, filter, 1);
  std::vector<double> current = coeffs.approx;
  for (std::size_t level = coeffs.levels; level >= 1; --level) {
    std::vector<double> out(coeffs.length_ledger[level - 1][0]);
    synthesis_step(filter, coeffs.mode, current, coeffs.details[coeffs.levels - level].bands[0], out);
    current = std::move(out);
  }
  return current;
}

WaveletCoefficients dwt2d(const Field2d& field, const WaveletFilter& filter, std::size_t levels, ExtensionMode mode) {
  if (field.values.size() != field.rows * field.cols) throw WaveletError("dwt2d: field size does not match extents");
  const auto row_ext = level_extents(field.rows, filter.taps(), mode, levels);
  const auto col_ext = level_extents(field.cols, filter.taps(), mode, levels);
  WaveletCoefficients out;
  out.filter = filter.name;
  out.mode = mode;
  out.levels = levels;
  out.details.resize(levels);
  Field2d current = field;
  for (std::size_t level = 1; level <= levels; ++level) {
    out.length_ledger.push_back({row_ext[level - 1], col_ext[level - 1]});
    Bands2d b = analysis_step_2d(filter, mode, current, true);
    out.details[levels - level] =
        DetailLevel{{b.ll.rows, b.ll.cols}, {std::move(b.lh.values), std::move(b.hl.values), std::move(b.hh.values)}};
    current = std::move(b.ll);
  }
  out.approx_shape = {current.rows, current.cols};
  out.approx = std::move(current.values);
  return out;
}

Field2d idwt2d(const WaveletCoefficients& coeffs, const WaveletFilter& filter) {
  check_coefficients(coeffs, filter, 2);
  Field2d current{coeffs.approx_shape[0], coeffs.approx_shape[1], coeffs.approx};
  for (std::size_t level = coeffs.levels; level >= 1; --level) {
    const auto& d = coeffs.details[coeffs.levels - level];
    Bands2d b;
    b.ll = std::move(current);
    b.lh = Field2d{d.shape[0], d.shape[1], d.bands[0]};
    b.hl = Field2d{d.shape[0], d.shape[1], d.bands[1]};
    b.hh = Field2d{d.shape[0], d.shape[1], d.bands[2]};
    const auto& ledger = coeffs.length_ledger[level - 1];
    current = synthesis_step_2d(filter, coeffs.mode, b, ledger[0], ledger[1]);
  }
  return current;
}

}  // namespace vswno::wavelet
