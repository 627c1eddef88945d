#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "noisespec/spectral_model.hpp"

namespace noisespec {

/// Closed frequency interval [lo_hz, hi_hz] over which spectra are fitted.
struct FitWindow {
  double lo_hz = 0.0;
  double hi_hz = 0.0;

  [[nodiscard]] bool contains(double nu) const { return nu >= lo_hz && nu <= hi_hz; }
  [[nodiscard]] double width() const { return hi_hz - lo_hz; }
  bool operator==(const FitWindow&) const = default;
};

/// Sampling and averaging settings of one acquisition.
struct AcquisitionConfig {
  double delta_s = 5e-6;   ///< sampling interval
  double t_total_s = 0.5;  ///< record duration
  int n_ave = 1;           ///< averaged records
  int n_bin = 1;           ///< adjacent bins per coarse bin
  FitWindow window{};

  /// Samples per record: t_total / delta rounded to the nearest even integer.
  [[nodiscard]] std::size_t record_length() const;
  /// Raw bin spacing 1 / (M delta).
  [[nodiscard]] double nu_t() const;
  /// Spacing of coarse-grained bins, n_bin * nu_t.
  [[nodiscard]] double bin_spacing() const { return n_bin * nu_t(); }
  /// Averaging count N_bin * N_ave.
  [[nodiscard]] int n_eff() const { return n_bin * n_ave; }

  void validate() const;
};

/// One-sided PSD on a uniform grid.
struct Spectrum {
  std::vector<double> nu;
  std::vector<double> s;
};

/// Spectrum whose every bin averages n_eff independent raw periodogram values.
struct AveragedSpectrum {
  std::vector<double> nu;
  std::vector<double> s_bar;
  int n_eff = 1;

  [[nodiscard]] std::size_t size() const { return nu.size(); }
};

/// Uniformly sampled real record.
struct TimeSeries {
  double t0 = 0.0;
  double delta = 0.0;
  std::vector<double> y;
};

/// Frequencies i * nu_t for i = 1 .. M/2 - 1 (DC and Nyquist excluded).
[[nodiscard]] std::vector<double> raw_grid(const AcquisitionConfig& cfg);

/// Coarse-bin center frequencies of raw_grid(cfg) grouped by cfg.n_bin.
[[nodiscard]] std::vector<double> coarse_grid(const AcquisitionConfig& cfg);

/// Draws an averaged spectrum directly from the periodogram statistics: every
/// coarse bin is Gamma(shape n_eff, mean f(nu_i)) and independent of the others.
[[nodiscard]] AveragedSpectrum sample_periodogram_exact(const SpectralParams& v, const AcquisitionConfig& cfg,
                                                        std::uint64_t seed);

/// Stationary Gaussian record whose expected periodogram is f on the grid.
/// Independent complex Gaussian Fourier coefficients, Hermitian symmetric,
/// inverse-transformed. Throws std::invalid_argument if M < 4.
[[nodiscard]] TimeSeries synthesize_timeseries(const SpectralParams& v, const AcquisitionConfig& cfg,
                                               std::uint64_t seed);

/// One-sided periodogram S_i = 2 delta |DFT_i|^2 / M, rectangular window,
/// bins i = 1 .. M/2 - 1. Sum(S_i) * nu_t equals the variance of the record
/// apart from the DC and Nyquist terms.
[[nodiscard]] Spectrum periodogram(const TimeSeries& ts);

/// Block means of n_bin adjacent bins; a trailing partial block is dropped.
[[nodiscard]] AveragedSpectrum coarse_grain(const Spectrum& sp, int n_bin);
[[nodiscard]] AveragedSpectrum coarse_grain(const AveragedSpectrum& sp, int n_bin);

/// Pointwise mean of spectra on an identical grid; n_eff adds up.
/// Throws std::invalid_argument on an empty list or mismatched grids.
[[nodiscard]] AveragedSpectrum average_spectra(std::span<const Spectrum> spectra);
[[nodiscard]] AveragedSpectrum average_spectra(std::span<const AveragedSpectrum> spectra);

/// Full acquisition through the time domain: n_ave synthesized records,
/// periodograms, averaging and coarse-graining.
[[nodiscard]] AveragedSpectrum acquire_timeseries(const SpectralParams& v, const AcquisitionConfig& cfg,
                                                  std::uint64_t seed);

}  // namespace noisespec
