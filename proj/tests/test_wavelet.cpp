#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vswno/wavelet.hpp"

using namespace vswno::wavelet;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double energy(const std::vector<double>& v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

double coefficient_energy(const WaveletCoefficients& c) {
  double e = energy(c.approx);
  for (const auto& level : c.details)
    for (const auto& band : level.bands) e += energy(band);
  return e;
}

bool depth_ok(std::size_t n, const WaveletFilter& f, ExtensionMode mode, std::size_t levels) {
  try {
    level_extents(n, f.taps(), mode, levels);
    return true;
  } catch (const WaveletError&) {
    return false;
  }
}

Field2d random_field(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return Field2d{rows, cols, oracle::random_vector(rows * cols, seed)};
}

}  // namespace

TEST_SUITE("wavelet") {

TEST_CASE("db2 matches its closed form") {
  const double s3 = std::sqrt(3.0);
  const double d = 4.0 * std::sqrt(2.0);
  // Scaling coefficients h0..h3; dec_lo stores them reversed.
  const std::vector<double> h{(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
  const auto& f = daubechies("db2");
  REQUIRE(f.taps() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(f.dec_lo[k] == doctest::Approx(h[3 - k]).epsilon(1e-14));
}

TEST_CASE("property: shipped filters satisfy the orthonormality invariants") {
  for (const auto& name : available_filters()) {
    CAPTURE(name);
    const auto& f = daubechies(name);
    CHECK(f.taps() == 2 * static_cast<std::size_t>(name[2] - '0'));
    double sq = 0.0;
    double hi_sum = 0.0;
    for (std::size_t k = 0; k < f.taps(); ++k) {
      sq += f.dec_lo[k] * f.dec_lo[k];
      hi_sum += f.dec_hi[k];
      const double sign = k % 2 == 0 ? 1.0 : -1.0;
      CHECK(std::abs(f.dec_hi[k] - sign * f.dec_lo[f.taps() - 1 - k]) < 1e-12);
      CHECK(f.rec_lo[k] == f.dec_lo[f.taps() - 1 - k]);
      CHECK(f.rec_hi[k] == f.dec_hi[f.taps() - 1 - k]);
    }
    CHECK(std::abs(sq - 1.0) < 1e-12);
    CHECK(std::abs(hi_sum) < 1e-12);
    CHECK_NOTHROW(validate_filter(f));
  }
  CHECK_THROWS_AS(daubechies("db9"), WaveletError);
}

TEST_CASE("periodic level equals the explicit analysis matrix") {
  for (const char* name : {"db2", "db4", "db6"}) {
    const auto& f = daubechies(name);
    const auto x = oracle::random_vector(32, 3);
    std::vector<double> lo_ref, hi_ref;
    oracle::periodic_level(f.dec_lo, f.dec_hi, x, lo_ref, hi_ref);
    std::vector<double> lo(16), hi(16);
    analysis_step(f, ExtensionMode::Periodic, x, lo, hi);
    CHECK(max_abs_diff(lo, lo_ref) < 1e-14);
    CHECK(max_abs_diff(hi, hi_ref) < 1e-14);
  }
}

TEST_CASE("constant signal has vanishing details") {
  for (const char* name : {"db2", "db4", "db6"}) {
    const std::vector<double> x(256, 1.7);
    const auto c = dwt1d(x, daubechies(name), 5, ExtensionMode::Periodic);
    for (const auto& level : c.details)
      for (double d : level.bands[0]) CHECK(std::abs(d) < 1e-10);
  }
}

TEST_CASE("1024 points, db6, eight levels leaves four approximation coefficients") {
  const auto c = dwt1d(oracle::random_vector(1024, 4), daubechies("db6"), 8, ExtensionMode::Periodic);
  CHECK(c.approx.size() == 1024 / 256);
  CHECK(c.details.size() == 8);
  CHECK(c.length_ledger.size() == 8);
}

TEST_CASE("symmetric ledger follows floor((len + taps - 1) / 2)") {
  const auto ext = level_extents(100, 12, ExtensionMode::Symmetric, 4);
  REQUIRE(ext.size() == 4);
  std::size_t n = 100;
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(ext[l] == n);
    n = (n + 11) / 2;
  }
}

TEST_CASE("too deep a decomposition names the failing level") {
  try {
    (void)dwt1d(oracle::random_vector(100, 1), daubechies("db4"), 3, ExtensionMode::Periodic);
    FAIL("expected WaveletError");
  } catch (const WaveletError& e) {
    CHECK(std::string(e.what()).find("level 3") != std::string::npos);
  }
  CHECK_THROWS_AS(dwt1d(oracle::random_vector(8, 1), daubechies("db6"), 1, ExtensionMode::Symmetric), WaveletError);
}

TEST_CASE("property: 1D perfect reconstruction and Parseval") {
  for (const char* name : {"db4", "db6"})
    for (std::size_t n : {64, 100, 1024})
      for (auto mode : {ExtensionMode::Periodic, ExtensionMode::Symmetric})
        for (std::size_t levels = 1; levels <= 8; ++levels) {
          const auto& f = daubechies(name);
          if (!depth_ok(n, f, mode, levels)) continue;
          CAPTURE(name);
          CAPTURE(n);
          CAPTURE(levels);
          const auto x = oracle::random_vector(n, n + levels);
          const auto c = dwt1d(x, f, levels, mode);
          CHECK(max_abs_diff(idwt1d(c, f), x) < 1e-10);
          if (mode == ExtensionMode::Periodic) CHECK(std::abs(coefficient_energy(c) - energy(x)) < 1e-10 * energy(x));
        }
}

TEST_CASE("zero coefficients reconstruct to zero") {
  const auto& f = daubechies("db4");
  auto c = dwt1d(oracle::random_vector(100, 2), f, 3, ExtensionMode::Symmetric);
  std::fill(c.approx.begin(), c.approx.end(), 0.0);
  for (auto& level : c.details)
    for (auto& band : level.bands) std::fill(band.begin(), band.end(), 0.0);
  for (double v : idwt1d(c, f)) CHECK(v == 0.0);
}

TEST_CASE("dropping details is a contraction in periodic mode") {
  const auto& f = daubechies("db6");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = oracle::random_vector(256, seed);
    auto c = dwt1d(x, f, 4, ExtensionMode::Periodic);
    for (auto& level : c.details)
      for (auto& band : level.bands) std::fill(band.begin(), band.end(), 0.0);
    CHECK(energy(idwt1d(c, f)) <= energy(x));
  }
}

TEST_CASE("inconsistent ledger is rejected") {
  const auto& f = daubechies("db4");
  auto c = dwt1d(oracle::random_vector(64, 2), f, 2, ExtensionMode::Periodic);
  c.approx.pop_back();
  CHECK_THROWS_AS(idwt1d(c, f), WaveletError);
}

TEST_CASE("property: linearity bandwise") {
  const auto& f = daubechies("db4");
  const auto x = oracle::random_vector(100, 5);
  const auto y = oracle::random_vector(100, 6);
  std::vector<double> z(100);
  for (std::size_t i = 0; i < 100; ++i) z[i] = 2.5 * x[i] - 0.75 * y[i];
  const auto cx = dwt1d(x, f, 3);
  const auto cy = dwt1d(y, f, 3);
  const auto cz = dwt1d(z, f, 3);
  for (std::size_t i = 0; i < cz.approx.size(); ++i)
    CHECK(std::abs(cz.approx[i] - (2.5 * cx.approx[i] - 0.75 * cy.approx[i])) < 1e-12);
  for (std::size_t l = 0; l < cz.details.size(); ++l)
    for (std::size_t i = 0; i < cz.details[l].bands[0].size(); ++i)
      CHECK(std::abs(cz.details[l].bands[0][i] - (2.5 * cx.details[l].bands[0][i] - 0.75 * cy.details[l].bands[0][i])) <
            1e-12);
}

TEST_CASE("property: 2D perfect reconstruction on odd grids") {
  struct Case {
    std::size_t rows, cols, levels;
    const char* filter;
    ExtensionMode mode;
  };
  const Case cases[] = {
      {43, 43, 1, "db4", ExtensionMode::Symmetric}, {43, 43, 3, "db6", ExtensionMode::Symmetric},
      {85, 85, 4, "db4", ExtensionMode::Symmetric}, {85, 85, 3, "db6", ExtensionMode::Symmetric},
      {64, 32, 3, "db4", ExtensionMode::Periodic},  {40, 56, 2, "db6", ExtensionMode::Periodic},
  };
  for (const auto& tc : cases) {
    CAPTURE(tc.rows);
    CAPTURE(tc.levels);
    const auto& f = daubechies(tc.filter);
    const Field2d x = random_field(tc.rows, tc.cols, tc.rows * 7 + tc.levels);
    const auto c = dwt2d(x, f, tc.levels, tc.mode);
    CHECK(c.details.size() == tc.levels);
    CHECK(c.details.front().bands.size() == 3);
    const Field2d back = idwt2d(c, f);
    CHECK(back.rows == tc.rows);
    CHECK(back.cols == tc.cols);
    CHECK(max_abs_diff(back.values, x.values) < 1e-10);
    if (tc.mode == ExtensionMode::Periodic)
      CHECK(std::abs(coefficient_energy(c) - energy(x.values)) < 1e-10 * energy(x.values));
  }
}

TEST_CASE("constant field has vanishing 2D details") {
  const Field2d x{43, 43, std::vector<double>(43 * 43, -0.4)};
  const auto c = dwt2d(x, daubechies("db4"), 2, ExtensionMode::Symmetric);
  for (const auto& level : c.details)
    for (const auto& band : level.bands)
      for (double d : band) CHECK(std::abs(d) < 1e-10);
}

TEST_CASE("separable 2D level equals row then column 1D transforms") {
  const auto& f = daubechies("db4");
  const auto mode = ExtensionMode::Periodic;
  const Field2d x = random_field(16, 8, 9);
  const Bands2d b = analysis_step_2d(f, mode, x, true);
  // rows first
  std::vector<double> row_lo(16 * 4), row_hi(16 * 4);
  for (std::size_t r = 0; r < 16; ++r) {
    std::vector<double> line(x.values.begin() + r * 8, x.values.begin() + (r + 1) * 8), lo, hi;
    oracle::periodic_level(f.dec_lo, f.dec_hi, line, lo, hi);
    std::copy(lo.begin(), lo.end(), row_lo.begin() + r * 4);
    std::copy(hi.begin(), hi.end(), row_hi.begin() + r * 4);
  }
  auto columns = [&](const std::vector<double>& src, std::vector<double>& lo_out, std::vector<double>& hi_out) {
    lo_out.assign(8 * 4, 0.0);
    hi_out.assign(8 * 4, 0.0);
    for (std::size_t c = 0; c < 4; ++c) {
      std::vector<double> line(16), lo, hi;
      for (std::size_t r = 0; r < 16; ++r) line[r] = src[r * 4 + c];
      oracle::periodic_level(f.dec_lo, f.dec_hi, line, lo, hi);
      for (std::size_t r = 0; r < 8; ++r) {
        lo_out[r * 4 + c] = lo[r];
        hi_out[r * 4 + c] = hi[r];
      }
    }
  };
  std::vector<double> ll, hl, lh, hh;
  columns(row_lo, ll, hl);
  columns(row_hi, lh, hh);
  CHECK(max_abs_diff(b.ll.values, ll) < 1e-14);
  CHECK(max_abs_diff(b.lh.values, lh) < 1e-14);
  CHECK(max_abs_diff(b.hl.values, hl) < 1e-14);
  CHECK(max_abs_diff(b.hh.values, hh) < 1e-14);
}

TEST_CASE("adjoint steps satisfy the dot-product identity") {
  for (auto mode : {ExtensionMode::Periodic, ExtensionMode::Symmetric}) {
    const auto& f = daubechies("db6");
    const std::size_t n = 40;
    const std::size_t k = coefficient_length(n, f.taps(), mode);
    const auto x = oracle::random_vector(n, 1);
    const auto gl = oracle::random_vector(k, 2);
    const auto gh = oracle::random_vector(k, 3);
    std::vector<double> lo(k), hi(k), xg(n, 0.0);
    analysis_step(f, mode, x, lo, hi);
    analysis_step_adjoint(f, mode, gl, gh, xg);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < k; ++i) lhs += lo[i] * gl[i] + hi[i] * gh[i];
    for (std::size_t i = 0; i < n; ++i) rhs += x[i] * xg[i];
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

}  // TEST_SUITE
