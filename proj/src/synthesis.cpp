#include "noisespec/synthesis.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>

#include "noisespec/rng.hpp"

namespace noisespec {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

std::vector<std::complex<double>> forward_real(std::vector<double> in) {
  const int m = static_cast<int>(in.size());
  std::vector<std::complex<double>> out(in.size() / 2 + 1);
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(m, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  return out;
}

std::vector<double> inverse_real(std::vector<std::complex<double>> in, std::size_t m) {
  std::vector<double> out(m);
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                    FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  return out;
}

template <class Values>
AveragedSpectrum block_means(const std::vector<double>& nu, const Values& s, int n_bin, int n_eff_in) {
  if (n_bin < 1) throw std::invalid_argument("n_bin must be >= 1");
  if (nu.size() != s.size()) throw std::invalid_argument("spectrum grid and values differ in length");
  const std::size_t blocks = nu.size() / static_cast<std::size_t>(n_bin);
  AveragedSpectrum out;
  out.nu.resize(blocks);
  out.s_bar.resize(blocks);
  out.n_eff = n_eff_in * n_bin;
  for (std::size_t b = 0; b < blocks; ++b) {
    double sum_nu = 0.0, sum_s = 0.0;
    for (int j = 0; j < n_bin; ++j) {
      const std::size_t i = b * n_bin + j;
      sum_nu += nu[i];
      sum_s += s[i];
    }
    out.nu[b] = sum_nu / n_bin;
    out.s_bar[b] = sum_s / n_bin;
  }
  return out;
}

}  // namespace

std::size_t AcquisitionConfig::record_length() const {
  const double ratio = t_total_s / delta_s;
  if (!(ratio > 0) || !std::isfinite(ratio)) return 0;
  return 2 * static_cast<std::size_t>(std::llround(ratio / 2.0));
}

double AcquisitionConfig::nu_t() const { return 1.0 / (static_cast<double>(record_length()) * delta_s); }

void AcquisitionConfig::validate() const {
  if (!(delta_s > 0)) throw std::invalid_argument("delta_s must be > 0");
  if (!(t_total_s > 0)) throw std::invalid_argument("t_total_s must be > 0");
  if (record_length() < 4) throw std::invalid_argument("record length t_total/delta must be >= 4");
  if (n_ave < 1) throw std::invalid_argument("n_ave must be >= 1");
  if (n_bin < 1) throw std::invalid_argument("n_bin must be >= 1");
  if (!(window.lo_hz >= 0 && window.lo_hz < window.hi_hz && window.hi_hz <= 0.5 / delta_s * (1 + 1e-12)))  // Nyquist, up to rounding
    throw std::invalid_argument("fit window must satisfy 0 <= fit_lo < fit_hi <= 1/(2 delta)");
}

std::vector<double> raw_grid(const AcquisitionConfig& cfg) {
  const std::size_t m = cfg.record_length();
  const double nu_t = cfg.nu_t();
  std::vector<double> nu;
  if (m < 4) return nu;
  nu.reserve(m / 2 - 1);
  for (std::size_t i = 1; i < m / 2; ++i) nu.push_back(static_cast<double>(i) * nu_t);
  return nu;
}

std::vector<double> coarse_grid(const AcquisitionConfig& cfg) {
  const auto raw = raw_grid(cfg);
  return block_means(raw, raw, cfg.n_bin, 1).nu;
}

AveragedSpectrum sample_periodogram_exact(const SpectralParams& v, const AcquisitionConfig& cfg, std::uint64_t seed) {
  v.validate();
  cfg.validate();
  AveragedSpectrum out;
  out.nu = coarse_grid(cfg);
  out.n_eff = cfg.n_eff();
  out.s_bar.resize(out.nu.size());
  auto rng = make_stream(seed, 0);
  const double shape = out.n_eff;
  for (std::size_t i = 0; i < out.nu.size(); ++i) {
    std::gamma_distribution<double> gamma(shape, eval_psd(v, out.nu[i]) / shape);
    out.s_bar[i] = gamma(rng);
  }
  return out;
}

TimeSeries synthesize_timeseries(const SpectralParams& v, const AcquisitionConfig& cfg, std::uint64_t seed) {
  v.validate();
  const std::size_t m = cfg.record_length();
  if (m < 4) throw std::invalid_argument("record length must be >= 4");
  const double delta = cfg.delta_s;
  const double nu_t = cfg.nu_t();

  // E|X_k|^2 = M f_k / (2 delta) so that 2 delta |X_k|^2 / M has mean f_k.
  auto rng = make_stream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> coeffs(m / 2 + 1);
  const double scale = static_cast<double>(m) / (2.0 * delta);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const double power = scale * eval_psd(v, static_cast<double>(k) * nu_t);
    if (k == 0 || k == m / 2) {
      coeffs[k] = {std::sqrt(power) * normal(rng), 0.0};
    } else {
      const double sd = std::sqrt(power / 2.0);
      const double re = sd * normal(rng);
      const double im = sd * normal(rng);
      coeffs[k] = {re, im};
    }
  }
  auto y = inverse_real(std::move(coeffs), m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (double& x : y) x *= inv_m;
  return TimeSeries{0.0, delta, std::move(y)};
}

Spectrum periodogram(const TimeSeries& ts) {
  const std::size_t m = ts.y.size();
  if (m < 4) throw std::invalid_argument("periodogram needs at least 4 samples");
  if (!(ts.delta > 0)) throw std::invalid_argument("sampling interval must be > 0");
  const auto dft = forward_real(ts.y);
  const double nu_t = 1.0 / (static_cast<double>(m) * ts.delta);
  const double norm = 2.0 * ts.delta / static_cast<double>(m);
  Spectrum out;
  const std::size_t bins = (m - 1) / 2;  // i = 1 .. ceil(M/2) - 1
  out.nu.resize(bins);
  out.s.resize(bins);
  for (std::size_t i = 1; i <= bins; ++i) {
    out.nu[i - 1] = static_cast<double>(i) * nu_t;
    out.s[i - 1] = norm * std::norm(dft[i]);
  }
  return out;
}

AveragedSpectrum coarse_grain(const Spectrum& sp, int n_bin) { return block_means(sp.nu, sp.s, n_bin, 1); }

AveragedSpectrum coarse_grain(const AveragedSpectrum& sp, int n_bin) {
  return block_means(sp.nu, sp.s_bar, n_bin, sp.n_eff);
}

namespace {

template <class T, class Values, class NEff>
AveragedSpectrum average_impl(std::span<const T> spectra, Values values, NEff n_eff_each) {
  if (spectra.empty()) throw std::invalid_argument("average_spectra needs at least one spectrum");
  const auto& first = spectra.front();
  AveragedSpectrum out;
  out.nu = first.nu;
  out.s_bar.assign(first.nu.size(), 0.0);
  out.n_eff = 0;
  for (const auto& sp : spectra) {
    if (sp.nu != first.nu) throw std::invalid_argument("average_spectra: mismatched frequency grids");
    if (n_eff_each(sp) != n_eff_each(first)) throw std::invalid_argument("average_spectra: mismatched n_eff");
    const auto& s = values(sp);
    if (s.size() != out.nu.size()) throw std::invalid_argument("average_spectra: grid and values differ in length");
    for (std::size_t i = 0; i < s.size(); ++i) out.s_bar[i] += s[i];
    out.n_eff += n_eff_each(sp);
  }
  const double inv = 1.0 / static_cast<double>(spectra.size());
  for (double& x : out.s_bar) x *= inv;
  return out;
}

}  // namespace

AveragedSpectrum average_spectra(std::span<const Spectrum> spectra) {
  return average_impl(
      spectra, [](const Spectrum& s) -> const std::vector<double>& { return s.s; },
      [](const Spectrum&) { return 1; });
}

AveragedSpectrum average_spectra(std::span<const AveragedSpectrum> spectra) {
  return average_impl(
      spectra, [](const AveragedSpectrum& s) -> const std::vector<double>& { return s.s_bar; },
      [](const AveragedSpectrum& s) { return s.n_eff; });
}

AveragedSpectrum acquire_timeseries(const SpectralParams& v, const AcquisitionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<Spectrum> records;
  records.reserve(cfg.n_ave);
  for (int k = 0; k < cfg.n_ave; ++k) {
    // Record k of this acquisition gets its own derived stream.
    const std::uint64_t record_seed = make_stream(seed, 1 + static_cast<std::uint64_t>(k))();
    records.push_back(periodogram(synthesize_timeseries(v, cfg, record_seed)));
  }
  auto averaged = average_spectra(records);
  return coarse_grain(averaged, cfg.n_bin);
}

}  // namespace noisespec
