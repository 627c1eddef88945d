#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "noisespec/estimation.hpp"
#include "noisespec/fisher.hpp"
#include "noisespec/spectral_model.hpp"
#include "noisespec/synthesis.hpp"

namespace noisespec {

enum class SynthesisPath { Exact, TimeSeries };

[[nodiscard]] std::string_view to_string(SynthesisPath p);

struct ValidationConfig {
  SpectralParams truth;
  AcquisitionConfig acquisition;
  int n_trials = 100;
  std::uint64_t master_seed = 1;
  SynthesisPath synthesis = SynthesisPath::Exact;
  FisherMethod crb_method = FisherMethod::DiscreteSum;
  unsigned threads = 0;
};

struct ValidationReport {
  int n_trials = 0;
  int n_failed = 0;          ///< fits that threw; excluded from gamma_exp
  int n_not_converged = 0;   ///< included in gamma_exp
  Vec4 truth = Vec4::Zero();
  Vec4 mean = Vec4::Zero();
  Mat4 gamma_exp = Mat4::Zero();
  Mat4 gamma_th = Mat4::Zero();
  Mat4 sigma_th = Mat4::Zero();
  Mat4 deviation = Mat4::Zero();
  double max_deviation = 0.0;
  int max_row = 0;
  int max_col = 0;
  /// sqrt(var_k2) of each fitted parameter: standard error of the diagonal
  /// of gamma_exp estimated from the fits alone.
  Vec4 diag_std_error = Vec4::Zero();
  /// Fitted vectors of the successful trials in trial order.
  std::vector<SpectralParams> fits;
};

/// Fisher information for the fit window of cfg: the discrete sum runs over
/// the coarse bins inside the window, the integral uses the coarse spacing.
[[nodiscard]] FisherResult fisher_for_window(const SpectralParams& v, const AcquisitionConfig& cfg,
                                             FisherMethod method);

/// As fisher_for_window, but throws NumericalError when the matrix is singular.
[[nodiscard]] FisherResult crb_for_window(const SpectralParams& v, const AcquisitionConfig& cfg, FisherMethod method);

/// n_trials independent synthesize-and-fit runs compared with the CRB.
/// Trial k draws from stream k of master_seed, so the report is independent
/// of the thread count. Throws std::invalid_argument if fewer than two
/// trials succeed.
[[nodiscard]] ValidationReport run_validation(const ValidationConfig& vc);

}  // namespace noisespec
