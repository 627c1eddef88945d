#include "noisespec/validation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "noisespec/errors.hpp"
#include "noisespec/parallel.hpp"
#include "noisespec/rng.hpp"

namespace noisespec {

std::string_view to_string(SynthesisPath p) { return p == SynthesisPath::Exact ? "exact" : "timeseries"; }

FisherResult fisher_for_window(const SpectralParams& v, const AcquisitionConfig& cfg, FisherMethod method) {
  if (method == FisherMethod::Integral) return fisher_integral(v, cfg.window, cfg.bin_spacing(), cfg.n_eff());
  std::vector<double> bins;
  for (double nu : coarse_grid(cfg))
    if (cfg.window.contains(nu)) bins.push_back(nu);
  if (bins.empty()) throw std::invalid_argument("fit window holds no bins");
  return fisher_discrete(v, bins, cfg.n_eff());
}

FisherResult crb_for_window(const SpectralParams& v, const AcquisitionConfig& cfg, FisherMethod method) {
  auto fr = fisher_for_window(v, cfg, method);
  if (fr.singular()) throw NumericalError("Fisher matrix is singular for the configured model");
  return fr;
}

ValidationReport run_validation(const ValidationConfig& vc) {
  vc.truth.validate();
  vc.acquisition.validate();
  if (vc.n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");

  const auto fr = crb_for_window(vc.truth, vc.acquisition, vc.crb_method);

  std::vector<std::optional<FitResult>> results(static_cast<std::size_t>(vc.n_trials));
  parallel_for(results.size(), vc.threads, [&](std::size_t k) {
    const std::uint64_t seed = make_stream(vc.master_seed, k)();
    const auto sp = vc.synthesis == SynthesisPath::Exact ? sample_periodogram_exact(vc.truth, vc.acquisition, seed)
                                                         : acquire_timeseries(vc.truth, vc.acquisition, seed);
    try {
      results[k] = mle_fit(sp, vc.acquisition.window);
    } catch (const std::exception&) {
      // counted as a failed trial below
    }
  });

  ValidationReport r;
  r.n_trials = vc.n_trials;
  r.truth = vc.truth.as_vector();
  for (const auto& res : results) {
    if (!res || !res->v_hat.valid()) {
      ++r.n_failed;
      continue;
    }
    if (!res->converged) ++r.n_not_converged;
    r.fits.push_back(res->v_hat);
  }
  if (r.fits.size() < 2) throw std::invalid_argument("fewer than two trials produced a fit");

  const auto sc = sample_covariance(r.fits);
  r.mean = sc.mean;
  r.gamma_exp = sc.gamma;
  r.gamma_th = *fr.gamma_th;
  const int n = static_cast<int>(r.fits.size());
  r.sigma_th = wishart_std(r.gamma_th, n);
  r.deviation = normalized_deviation(r.gamma_exp, r.gamma_th, n);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      if (r.deviation(i, j) > r.max_deviation) {
        r.max_deviation = r.deviation(i, j);
        r.max_row = i;
        r.max_col = j;
      }

  if (r.fits.size() >= 4) {
    std::vector<double> column(r.fits.size());
    for (int d = 0; d < 4; ++d) {
      for (std::size_t t = 0; t < r.fits.size(); ++t) column[t] = r.fits[t].as_vector()[d];
      r.diag_std_error[d] = std::sqrt(std::max(0.0, var_k2(column)));
    }
  }
  return r;
}

}  // namespace noisespec
