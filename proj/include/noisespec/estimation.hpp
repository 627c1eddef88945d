#pragma once

#include <optional>
#include <span>
#include <vector>

#include "noisespec/spectral_model.hpp"
#include "noisespec/synthesis.hpp"

namespace noisespec {

struct FitResult {
  SpectralParams v_hat;
  double chi2 = 0.0;
  int n_iter = 0;
  bool converged = false;
  FitWindow window;
  /// Objective after the starting point and after every accepted step.
  std::vector<double> trace;
};

struct FitOptions {
  int max_iter = 500;
  double rel_tol = 1e-12;   ///< relative objective decrease that counts as converged
  double step_tol = 1e-10;  ///< scaled step norm that counts as converged
};

struct SampleCovariance {
  Vec4 mean = Vec4::Zero();
  Mat4 gamma = Mat4::Zero();
  int n_samples = 0;
};

/// Sum over bins inside the window of (1 - S_i / f_i)^2.
[[nodiscard]] double chi_squared(const SpectralParams& v, const AveragedSpectrum& sp, const FitWindow& window);

/// Heuristic starting point read off the spectrum. Needs >= 8 bins in the window.
[[nodiscard]] SpectralParams initial_guess(const AveragedSpectrum& sp, const FitWindow& window);

/// Minimizes chi_squared over the window.
///
/// Levenberg-Marquardt on the residuals 1 - S_i/f_i with the analytic
/// Jacobian; S_ph, S_at and the linewidth are optimized in log space, the
/// line center is clamped to the window widened by its own width on both
/// sides. Falls back to Nelder-Mead when the normal matrix loses rank (a
/// vanishing peak makes line center and width unidentifiable). Throws
/// std::invalid_argument if the window holds fewer than 8 bins.
[[nodiscard]] FitResult mle_fit(const AveragedSpectrum& sp, const FitWindow& window,
                                const std::optional<SpectralParams>& guess = std::nullopt,
                                const FitOptions& options = {});

/// Mean and divide-by-N covariance of fitted parameter vectors. The result
/// does not depend on the order of the input. Throws on fewer than 2 fits.
[[nodiscard]] SampleCovariance sample_covariance(std::span<const SpectralParams> fits);

/// Fisher k-statistics computed from power sums.
[[nodiscard]] double k2(std::span<const double> x);
[[nodiscard]] double k4(std::span<const double> x);
/// Unbiased estimate of var(k2).
[[nodiscard]] double var_k2(std::span<const double> x);

}  // namespace noisespec
