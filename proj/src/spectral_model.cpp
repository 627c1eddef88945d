#include "noisespec/spectral_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace noisespec {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

bool SpectralParams::valid() const {
  return finite_all({s_ph, nu_l, s_at, delta_nu}) && s_ph > 0 && s_at >= 0 && delta_nu > 0 && nu_l > 0;
}

void SpectralParams::validate() const {
  require(finite_all({s_ph, nu_l, s_at, delta_nu}), "spectral parameters must be finite");
  require(s_ph > 0, "s_ph must be > 0");
  require(nu_l > 0, "nu_l must be > 0");
  require(s_at >= 0, "s_at must be >= 0");
  require(delta_nu > 0, "delta_nu must be > 0");
}

void ExperimentConditions::validate() const {
  require(finite_all({n_per_cm3, p_w, xi2}), "experiment conditions must be finite");
  require(n_per_cm3 >= 0, "n_per_cm3 must be >= 0");
  require(p_w > 0, "probe power must be > 0");
  require(xi2 > 0, "xi2 must be > 0");
}

void InstrumentConstants::validate() const {
  require(gain_v_per_a > 0, "gain_v_per_a must be > 0");
  require(electron_charge_c > 0, "electron_charge_c must be > 0");
  require(quantum_efficiency > 0, "quantum_efficiency must be > 0");
  require(photon_energy_j > 0, "photon_energy_j must be > 0");
  require(kappa2 > 0, "kappa2 must be > 0");
  require(a_eff_cm2 > 0, "a_eff_cm2 must be > 0");
  require(l_cell_cm > 0, "l_cell_cm must be > 0");
  require(isotope_fraction > 0 && isotope_fraction <= 1, "isotope_fraction must be in (0, 1]");
  require(gamma0_per_s > 0, "gamma0_per_s must be > 0");
  require(alpha_cm3_per_s >= 0, "alpha_cm3_per_s must be >= 0");
  require(beta_per_s_per_w >= 0, "beta_per_s_per_w must be >= 0");
  require(nu_l_hz > 0, "nu_l_hz must be > 0");
}

double eval_psd(const SpectralParams& v, double nu) {
  const double d = nu - v.nu_l;
  const double w2 = v.delta_nu * v.delta_nu;
  return v.s_ph + v.s_at * w2 / (4.0 * d * d + w2);
}

Vec4 grad_log_psd(const SpectralParams& v, double nu) {
  const double d = nu - v.nu_l;
  const double w = v.delta_nu;
  const double den = 4.0 * d * d + w * w;
  const double lor = w * w / den;
  const double f = v.s_ph + v.s_at * lor;
  const double den2 = den * den;
  Vec4 g;
  g[kShotNoise] = 1.0;
  g[kLarmor] = v.s_at * w * w * 8.0 * d / den2;
  g[kAtomic] = lor;
  g[kLinewidth] = v.s_at * 8.0 * w * d * d / den2;
  return g / f;
}

SpectralParams params_from_conditions(const ExperimentConditions& c, const InstrumentConstants& k) {
  c.validate();
  k.validate();
  const double width = (k.gamma0_per_s + k.alpha_cm3_per_s * c.n_per_cm3 + k.beta_per_s_per_w * c.p_w) / std::numbers::pi;
  if (!(width > 0)) throw std::invalid_argument("forward model gives non-positive linewidth");

  const double g2 = k.gain_v_per_a * k.gain_v_per_a;
  const double photocurrent = k.responsivity() * c.p_w;
  const double s_ph = 2.0 * g2 * k.electron_charge_c * photocurrent * c.xi2;
  const double s_at = 8.0 * g2 * photocurrent * photocurrent * k.kappa2 * k.a_eff_cm2 * k.l_cell_cm *
                      (k.isotope_fraction * c.n_per_cm3) / (std::numbers::pi * width);

  SpectralParams v{s_ph * kPsdUnitScale, k.nu_l_hz, s_at * kPsdUnitScale, width};
  v.validate();
  return v;
}

}  // namespace noisespec
