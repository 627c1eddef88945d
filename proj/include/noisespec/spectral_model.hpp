#pragma once

#include <Eigen/Core>

namespace noisespec {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Position of each spectral parameter in 4-vectors and 4x4 matrices.
/// The order is fixed: background, line center, peak height, linewidth.
enum ParamIndex : int { kShotNoise = 0, kLarmor = 1, kAtomic = 2, kLinewidth = 3 };

/// White background plus Lorentzian resonance.
///
/// PSD values are in uV^2/Hz, frequencies in Hz.
struct SpectralParams {
  double s_ph = 0.0;      ///< background PSD
  double nu_l = 0.0;      ///< resonance center
  double s_at = 0.0;      ///< peak PSD above background
  double delta_nu = 0.0;  ///< full width at half maximum

  [[nodiscard]] Vec4 as_vector() const { return {s_ph, nu_l, s_at, delta_nu}; }
  [[nodiscard]] static SpectralParams from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

  [[nodiscard]] bool valid() const;
  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  bool operator==(const SpectralParams&) const = default;
};

/// Operating point of the experiment.
struct ExperimentConditions {
  double n_per_cm3 = 0.0;  ///< atomic number density
  double p_w = 0.0;        ///< probe power reaching the detector
  double xi2 = 1.0;        ///< squeezing factor, 1 = shot-noise level

  void validate() const;
};

/// Detector and vapor-cell constants of the forward model.
///
/// Defaults are the detector/cell values of the Rb setup (795 nm, 3 cm cell).
/// The relaxation and coupling constants have no meaningful default and are
/// left at zero; a run configuration must supply them.
struct InstrumentConstants {
  double gain_v_per_a = 1e6;
  double electron_charge_c = 1.6e-19;
  double quantum_efficiency = 0.0;
  double photon_energy_j = 2.49e-19;
  double kappa2 = 0.0;
  double a_eff_cm2 = 0.054;
  double l_cell_cm = 3.0;
  double isotope_fraction = 0.72;
  double gamma0_per_s = 0.0;
  double alpha_cm3_per_s = 0.0;
  double beta_per_s_per_w = 0.0;
  double nu_l_hz = 42.6e3;

  /// Detector responsivity eta*q/E_ph, A/W.
  [[nodiscard]] double responsivity() const { return quantum_efficiency * electron_charge_c / photon_energy_j; }

  void validate() const;
};

/// uV^2 per V^2.
inline constexpr double kPsdUnitScale = 1e12;

/// f(nu) = S_ph + S_at * dnu^2 / (4 (nu - nu_L)^2 + dnu^2).
[[nodiscard]] double eval_psd(const SpectralParams& v, double nu);

/// Analytic d ln f / d v_j at nu, in parameter order.
[[nodiscard]] Vec4 grad_log_psd(const SpectralParams& v, double nu);

/// Forward model from (n, P, xi^2) to spectral parameters in uV^2/Hz and Hz.
/// Throws std::invalid_argument when the resulting linewidth is not positive.
[[nodiscard]] SpectralParams params_from_conditions(const ExperimentConditions& c, const InstrumentConstants& k);

/// Peak-to-background ratio S_at / S_ph.
[[nodiscard]] inline double snr(const SpectralParams& v) { return v.s_at / v.s_ph; }

}  // namespace noisespec
