#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "noisespec/spectral_model.hpp"
#include "noisespec/synthesis.hpp"

namespace noisespec {

/// Axes of an (n, P) scan. Both must be non-empty and strictly ascending.
struct GridSpec {
  std::vector<double> n_values;  ///< cm^-3
  std::vector<double> p_values;  ///< W

  /// `count` points from lo to hi inclusive on each axis.
  [[nodiscard]] static GridSpec linear(double n_lo, double n_hi, std::size_t n_count, double p_lo, double p_hi,
                                       std::size_t p_count);
  void validate() const;
};

/// Diagonal CRB variances over the grid. surfaces[k] is row-major with the
/// density index slowest: surfaces[k][i * p_values.size() + j]. Points where
/// the Fisher matrix is singular or the forward model is invalid hold NaN.
struct ScanGrid {
  std::vector<double> n_values;
  std::vector<double> p_values;
  double xi2 = 1.0;
  std::array<std::vector<double>, 4> surfaces;

  [[nodiscard]] double at(int param, std::size_t i, std::size_t j) const {
    return surfaces[static_cast<std::size_t>(param)][i * p_values.size() + j];
  }
};

struct OptimumReport {
  int param_index = 1;  ///< 1-based, matching Gamma_11 .. Gamma_44
  double n_opt = 0.0;
  double p_opt = 0.0;
  double gamma_min = 0.0;
  bool interior = false;
  /// Vertex of the parabola through the argmin and its two neighbours on each
  /// axis; only set for interior optima.
  std::optional<double> n_refined;
  std::optional<double> p_refined;
};

/// Gamma_th diagonals at every grid point: forward model, then
/// fisher_integral over cfg.window with bin spacing cfg.bin_spacing() and
/// N = cfg.n_eff(). Cells are evaluated on up to `threads` workers.
[[nodiscard]] ScanGrid scan_grid(const GridSpec& grid, const InstrumentConstants& k, const AcquisitionConfig& cfg,
                                 double xi2, unsigned threads = 0);

/// Grid argmin of Gamma_{param_index, param_index}; ties go to the smaller
/// (n, P) pair. Throws std::invalid_argument if every entry is missing.
[[nodiscard]] OptimumReport find_optimum(const ScanGrid& sg, int param_index);

/// Gamma_th,ii(xi2_b) / Gamma_th,ii(xi2_a) at fixed (n, P). Throws
/// NumericalError if the Fisher matrix is singular at either point.
[[nodiscard]] Vec4 squeezing_gain(const ExperimentConditions& c, const InstrumentConstants& k,
                                  const AcquisitionConfig& cfg, double xi2_a, double xi2_b);

/// CRB covariance at one operating point, as used by the scan.
[[nodiscard]] std::optional<Mat4> crb_at(const ExperimentConditions& c, const InstrumentConstants& k,
                                         const AcquisitionConfig& cfg);

}  // namespace noisespec
