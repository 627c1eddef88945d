#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "noisespec/spectral_model.hpp"
#include "noisespec/synthesis.hpp"

namespace noisespec {

enum class FisherMethod { DiscreteSum, Integral };

[[nodiscard]] std::string_view to_string(FisherMethod m);

/// Fisher information of the averaged spectrum and its Cramer-Rao covariance.
struct FisherResult {
  Mat4 info = Mat4::Zero();
  /// info^-1; empty when info is rank deficient.
  std::optional<Mat4> gamma_th;
  int rank = 0;
  double n_eff = 0.0;
  /// Bin spacing the information refers to, Hz.
  double nu_t = 0.0;
  FitWindow window;
  FisherMethod method = FisherMethod::DiscreteSum;

  [[nodiscard]] bool singular() const { return !gamma_th.has_value(); }
};

struct SymmetricInverse {
  std::optional<Mat4> inverse;
  int rank = 0;
};

/// Inverts a symmetric positive semidefinite matrix after scaling it to unit
/// diagonal. Rank is counted from the scaled eigenvalues (relative cutoff
/// 1e-12); a rank-deficient input yields no inverse. The inverse is exactly
/// symmetric.
[[nodiscard]] SymmetricInverse invert_symmetric(const Mat4& m);

/// I = (N + 2) * sum_i g_i g_i^T with g_i = grad ln f at bins[i].
[[nodiscard]] FisherResult fisher_discrete(const SpectralParams& v, std::span<const double> bins, double n_eff);

/// I = (N + 2) / nu_t * integral over the window of g g^T, where nu_t is the
/// spacing of the bins that carry n_eff averages each. Throws NumericalError
/// if the quadrature does not converge.
[[nodiscard]] FisherResult fisher_integral(const SpectralParams& v, const FitWindow& window, double nu_t,
                                           double n_eff);

/// Covariance from linear error propagation through the fit:
/// L_ij = d_j f_i / f_i, M = L^T L, Gamma = M^-1 / N.
/// Throws NumericalError when M is singular.
[[nodiscard]] Mat4 error_propagation_covariance(const SpectralParams& v, std::span<const double> bins,
                                                double n_eff);

/// Standard deviations of the elements of an N-sample MLE covariance matrix
/// drawn from a normal law with covariance gamma_th:
/// sigma_ij = sqrt((G_ij^2 + G_ii G_jj) / N).
[[nodiscard]] Mat4 wishart_std(const Mat4& gamma_th, int n_samples);

/// |gamma_th - gamma_exp| / wishart_std(gamma_th, N), elementwise. An entry
/// with zero sigma is 0 when the difference is 0 and +inf otherwise.
[[nodiscard]] Mat4 normalized_deviation(const Mat4& gamma_exp, const Mat4& gamma_th, int n_samples);

}  // namespace noisespec
