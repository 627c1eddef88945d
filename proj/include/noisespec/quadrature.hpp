#pragma once

#include <functional>
#include <span>

#include "noisespec/spectral_model.hpp"

namespace noisespec {

struct MatrixIntegral {
  Mat4 value = Mat4::Zero();
  double error = 0.0;  ///< max_jk |err_jk| / sqrt(|I_jj I_kk|)
  int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of a symmetric
/// 4x4-matrix-valued function over [a, b], split first at `breaks`.
///
/// Element errors are measured against sqrt(I_jj I_kk), so off-diagonal
/// entries that cancel to ~0 do not force needless refinement. Throws
/// NumericalError if `rel_tol` is not met within `max_intervals` pieces.
[[nodiscard]] MatrixIntegral integrate_symmetric(const std::function<Mat4(double)>& f, double a, double b,
                                                 std::span<const double> breaks, double rel_tol,
                                                 int max_intervals = 4000);

}  // namespace noisespec
