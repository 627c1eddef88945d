#include "noisespec/fisher.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "noisespec/errors.hpp"
#include "noisespec/quadrature.hpp"

namespace noisespec {

namespace {

constexpr double kRankCutoff = 1e-12;
constexpr double kQuadratureTolerance = 1e-10;

Mat4 symmetrized(const Mat4& m) {
  Mat4 out;
  for (int j = 0; j < 4; ++j)
    for (int k = j; k < 4; ++k) out(j, k) = out(k, j) = m(j, k);
  return out;
}

Mat4 outer_sum(const SpectralParams& v, std::span<const double> bins) {
  Mat4 sum = Mat4::Zero();
  for (double nu : bins) {
    const Vec4 g = grad_log_psd(v, nu);
    sum.noalias() += g * g.transpose();
  }
  return symmetrized(sum);
}

// info = prefactor * sum. The sum is inverted before the prefactor is applied
// so that covariances sharing the same sum differ only by their scale factor.
FisherResult finish(const Mat4& sum, double prefactor, FisherMethod method, double n_eff, double nu_t,
                    const FitWindow& window) {
  FisherResult out;
  out.info = symmetrized(prefactor * sum);
  auto inv = invert_symmetric(symmetrized(sum));
  if (inv.inverse) out.gamma_th = symmetrized(*inv.inverse / prefactor);
  out.rank = inv.rank;
  out.n_eff = n_eff;
  out.nu_t = nu_t;
  out.window = window;
  out.method = method;
  return out;
}

}  // namespace

std::string_view to_string(FisherMethod m) {
  return m == FisherMethod::DiscreteSum ? "discrete-sum" : "integral";
}

SymmetricInverse invert_symmetric(const Mat4& m) {
  SymmetricInverse out;
  Vec4 inv_sqrt = Vec4::Zero();
  for (int j = 0; j < 4; ++j) {
    const double d = m(j, j);
    if (d > 0 && std::isfinite(d)) inv_sqrt[j] = 1.0 / std::sqrt(d);
  }
  const Mat4 scaled = inv_sqrt.asDiagonal() * m * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat4> eig(symmetrized(scaled));
  const Vec4 ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  for (int j = 0; j < 4; ++j)
    if (largest > 0 && ev[j] > kRankCutoff * largest) ++out.rank;
  if (out.rank < 4 || (inv_sqrt.array() == 0).any()) return out;

  const Mat4& vecs = eig.eigenvectors();
  const Mat4 scaled_inverse = vecs * ev.cwiseInverse().asDiagonal() * vecs.transpose();
  out.inverse = symmetrized(inv_sqrt.asDiagonal() * scaled_inverse * inv_sqrt.asDiagonal());
  return out;
}

FisherResult fisher_discrete(const SpectralParams& v, std::span<const double> bins, double n_eff) {
  v.validate();
  if (bins.empty()) throw std::invalid_argument("fisher_discrete needs at least one bin");
  if (!(n_eff > 0)) throw std::invalid_argument("n_eff must be > 0");
  const double spacing = bins.size() > 1 ? (bins.back() - bins.front()) / static_cast<double>(bins.size() - 1) : 0.0;
  return finish(outer_sum(v, bins), n_eff + 2.0, FisherMethod::DiscreteSum, n_eff, spacing, {bins.front(), bins.back()});
}

FisherResult fisher_integral(const SpectralParams& v, const FitWindow& window, double nu_t, double n_eff) {
  v.validate();
  if (!(window.hi_hz > window.lo_hz)) throw std::invalid_argument("fit window must have fit_lo < fit_hi");
  if (!(nu_t > 0)) throw std::invalid_argument("nu_t must be > 0");
  if (!(n_eff > 0)) throw std::invalid_argument("n_eff must be > 0");

  // The integrand is concentrated within a few linewidths of the center.
  std::vector<double> breaks;
  for (double m : {0.0, 0.5, 2.0, 8.0, 32.0}) {
    breaks.push_back(v.nu_l - m * v.delta_nu);
    breaks.push_back(v.nu_l + m * v.delta_nu);
  }
  const auto integrand = [&v](double nu) -> Mat4 {
    const Vec4 g = grad_log_psd(v, nu);
    return g * g.transpose();
  };
  const auto integral = integrate_symmetric(integrand, window.lo_hz, window.hi_hz, breaks, kQuadratureTolerance);
  return finish(integral.value, (n_eff + 2.0) / nu_t, FisherMethod::Integral, n_eff, nu_t, window);
}

Mat4 error_propagation_covariance(const SpectralParams& v, std::span<const double> bins, double n_eff) {
  v.validate();
  if (bins.empty()) throw std::invalid_argument("error_propagation_covariance needs at least one bin");
  if (!(n_eff > 0)) throw std::invalid_argument("n_eff must be > 0");
  // M = L^T L accumulated row by row, in the same order as the Fisher sum;
  // row i of L is d_j f / f = d_j ln f at bin i.
  const Mat4 mmat = outer_sum(v, bins);
  const auto inv = invert_symmetric(mmat);
  if (!inv.inverse) throw NumericalError("error propagation: M = L^T L is singular");
  return symmetrized(*inv.inverse / n_eff);
}

Mat4 wishart_std(const Mat4& gamma_th, int n_samples) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  Mat4 out;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      const double var = (gamma_th(i, j) * gamma_th(i, j) + gamma_th(i, i) * gamma_th(j, j)) / n_samples;
      out(i, j) = out(j, i) = std::sqrt(std::max(var, 0.0));
    }
  }
  return out;
}

Mat4 normalized_deviation(const Mat4& gamma_exp, const Mat4& gamma_th, int n_samples) {
  const Mat4 sigma = wishart_std(gamma_th, n_samples);
  Mat4 out;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      // Average the mirrored entries so an asymmetric input still gives a symmetric answer.
      const double diff = std::abs(gamma_th(i, j) - gamma_exp(i, j)) / 2.0 + std::abs(gamma_th(j, i) - gamma_exp(j, i)) / 2.0;
      double d;
      if (sigma(i, j) > 0) {
        d = diff / sigma(i, j);
      } else {
        d = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      }
      out(i, j) = out(j, i) = d;
    }
  }
  return out;
}

}  // namespace noisespec
