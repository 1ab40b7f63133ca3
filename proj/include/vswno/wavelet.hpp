#pragma once

// Multilevel orthonormal Daubechies filter banks in 1D and 2D.
//
// One analysis level computes, for every output index i,
//   lo[i] = sum_j dec_lo[j] * x[ext(2i + 1 - j)]
// and likewise for hi, where ext() applies the boundary extension. Synthesis
// is the transpose of analysis restricted to the original samples, which
// reconstructs exactly for both extension modes.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vswno::wavelet {

enum class ExtensionMode { Periodic, Symmetric };

std::string_view mode_name(ExtensionMode mode);
ExtensionMode parse_mode(std::string_view name);

class WaveletError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WaveletFilter {
  std::string name;
  std::vector<double> dec_lo;
  std::vector<double> dec_hi;
  std::vector<double> rec_lo;
  std::vector<double> rec_hi;

  std::size_t taps() const { return dec_lo.size(); }
};

/// Shipped filters: db2 .. db6 (dbN has 2N taps). Tables are checked by
/// validate_filter on first access.
const WaveletFilter& daubechies(std::string_view name);
std::vector<std::string> available_filters();
/// Throws WaveletError if an orthonormality or mirror relation fails.
void validate_filter(const WaveletFilter& filter, double tol = 1e-12);

/// Output length of one analysis level applied to n samples.
std::size_t coefficient_length(std::size_t n, std::size_t taps, ExtensionMode mode);

/// Input extents at every level (entry 0 is the original extent); throws
/// WaveletError naming the first level that cannot be decomposed.
std::vector<std::size_t> level_extents(std::size_t n, std::size_t taps, ExtensionMode mode, std::size_t levels);

// Single-level building blocks. `hi` spans may be empty to skip that band
// (treated as zeros on the synthesis side). Adjoint routines accumulate.
void analysis_step(const WaveletFilter& f, ExtensionMode mode, std::span<const double> in, std::span<double> lo,
                   std::span<double> hi);
void analysis_step_adjoint(const WaveletFilter& f, ExtensionMode mode, std::span<const double> lo_grad,
                           std::span<const double> hi_grad, std::span<double> in_grad);
void synthesis_step(const WaveletFilter& f, ExtensionMode mode, std::span<const double> lo, std::span<const double> hi,
                    std::span<double> out);
void synthesis_step_adjoint(const WaveletFilter& f, ExtensionMode mode, std::span<const double> out_grad,
                            std::span<double> lo_grad, std::span<double> hi_grad);

/// Row-major field of extent rows x cols.
struct Field2d {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

/// Separable 2D level: rows (axis 1) first, then columns (axis 0).
/// Band naming is (axis 0 filter, axis 1 filter): lh = low rows, high cols.
struct Bands2d {
  Field2d ll, lh, hl, hh;
};

Bands2d analysis_step_2d(const WaveletFilter& f, ExtensionMode mode, const Field2d& in, bool with_details);
/// Accumulates into in_grad (shape of the level input). Detail grads may be empty fields.
void analysis_step_2d_adjoint(const WaveletFilter& f, ExtensionMode mode, const Bands2d& grad, Field2d& in_grad);
/// Detail bands may be empty (treated as zero). Output has extent rows x cols.
Field2d synthesis_step_2d(const WaveletFilter& f, ExtensionMode mode, const Bands2d& bands, std::size_t rows,
                          std::size_t cols);
/// Returns band gradients (details left empty when with_details is false).
Bands2d synthesis_step_2d_adjoint(const WaveletFilter& f, ExtensionMode mode, const Field2d& out_grad,
                                  std::size_t band_rows, std::size_t band_cols, bool with_details);

/// Detail bands of one level: one array in 1D, {LH, HL, HH} in 2D.
struct DetailLevel {
  std::vector<std::size_t> shape;
  std::vector<std::vector<double>> bands;
};

struct WaveletCoefficients {
  std::string filter;
  ExtensionMode mode = ExtensionMode::Symmetric;
  std::size_t levels = 0;
  std::vector<std::size_t> approx_shape;
  std::vector<double> approx;
  /// Coarse first: details[0] is level m, details[m-1] is level 1.
  std::vector<DetailLevel> details;
  /// ledger[l] holds the input extents of level l+1; ledger[0] is the original shape.
  std::vector<std::vector<std::size_t>> length_ledger;

  std::size_t rank() const { return approx_shape.size(); }
};

WaveletCoefficients dwt1d(std::span<const double> signal, const WaveletFilter& filter, std::size_t levels,
                          ExtensionMode mode = ExtensionMode::Symmetric);
std::vector<double> idwt1d(const WaveletCoefficients& coeffs, const WaveletFilter& filter);

WaveletCoefficients dwt2d(const Field2d& field, const WaveletFilter& filter, std::size_t levels,
                          ExtensionMode mode = ExtensionMode::Symmetric);
Field2d idwt2d(const WaveletCoefficients& coeffs, const WaveletFilter& filter);

}  // namespace vswno::wavelet
