#include "noisespec/estimation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace noisespec {

namespace {

constexpr int kMinBins = 8;

struct WindowData {
  std::vector<double> nu;
  std::vector<double> s;
};

WindowData select_window(const AveragedSpectrum& sp, const FitWindow& window) {
  if (sp.nu.size() != sp.s_bar.size()) throw std::invalid_argument("spectrum grid and values differ in length");
  WindowData out;
  for (std::size_t i = 0; i < sp.nu.size(); ++i) {
    if (window.contains(sp.nu[i])) {
      out.nu.push_back(sp.nu[i]);
      out.s.push_back(sp.s_bar[i]);
    }
  }
  return out;
}

double median(std::vector<double> xs) {
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  if (xs.size() % 2 == 1) return xs[mid];
  const double upper = xs[mid];
  const double lower = *std::max_element(xs.begin(), xs.begin() + mid);
  return 0.5 * (lower + upper);
}

// Optimizer coordinates: (ln S_ph, nu_L, ln S_at, ln dnu).
using Coords = Eigen::Vector4d;

struct Bounds {
  Coords lo;
  Coords hi;
};

class Problem {
 public:
  Problem(WindowData data, const FitWindow& window) : data_(std::move(data)) {
    const double w = window.width();
    bounds_.lo << -std::numeric_limits<double>::infinity(), window.lo_hz - w, -std::numeric_limits<double>::infinity(),
        std::log(1e-6 * w);
    bounds_.hi << std::numeric_limits<double>::infinity(), window.hi_hz + w, std::numeric_limits<double>::infinity(),
        std::log(1e2 * w);
  }

  static Coords to_coords(const SpectralParams& v) {
    return {std::log(v.s_ph), v.nu_l, std::log(v.s_at), std::log(v.delta_nu)};
  }
  static SpectralParams to_params(const Coords& x) {
    return {std::exp(x[0]), x[1], std::exp(x[2]), std::exp(x[3])};
  }

  // Keeps the peak height within 12 decades of the background so that the
  // log coordinate stays finite for a vanishing peak.
  Coords clamp(Coords x) const {
    Coords lo = bounds_.lo;
    lo[2] = x[0] + std::log(1e-12);
    for (int j = 0; j < 4; ++j) x[j] = std::clamp(x[j], lo[j], bounds_.hi[j]);
    return x;
  }

  double objective(const Coords& x) const {
    const auto v = to_params(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < data_.nu.size(); ++i) {
      const double r = 1.0 - data_.s[i] / eval_psd(v, data_.nu[i]);
      sum += r * r;
    }
    return sum;
  }

  // Residuals r_i = 1 - S_i/f_i and their Jacobian in optimizer coordinates.
  void linearize(const Coords& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const {
    const auto v = to_params(x);
    const Eigen::Vector4d chain(v.s_ph, 1.0, v.s_at, v.delta_nu);
    const auto n = static_cast<Eigen::Index>(data_.nu.size());
    r.resize(n);
    jac.resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ratio = data_.s[i] / eval_psd(v, data_.nu[i]);
      r[i] = 1.0 - ratio;
      const Vec4 g = grad_log_psd(v, data_.nu[i]);
      jac.row(i) = (ratio * g.cwiseProduct(chain)).transpose();
    }
  }

  // Step length with the line-center component measured in linewidths.
  static double step_norm(const Coords& step, const Coords& x) {
    Coords s = step;
    s[1] /= std::exp(x[3]);
    return s.norm();
  }

 private:
  WindowData data_;
  Bounds bounds_;
};

bool well_conditioned(const Eigen::Matrix4d& normal) {
  const Eigen::Vector4d diag = normal.diagonal();
  if ((diag.array() <= 0).any() || !diag.allFinite()) return false;
  const Eigen::Vector4d inv_sqrt = diag.cwiseSqrt().cwiseInverse();
  const Eigen::Matrix4d scaled = inv_sqrt.asDiagonal() * normal * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(scaled, Eigen::EigenvaluesOnly);
  const auto ev = eig.eigenvalues();
  return ev[0] > 1e-12 * ev[3];
}

struct Outcome {
  Coords x;
  double f;
  int iterations;
  bool converged;
};

Outcome nelder_mead(const Problem& p, Coords start, const FitOptions& opt, std::vector<double>& trace) {
  std::array<Coords, 5> simplex;
  std::array<double, 5> values;
  simplex[0] = p.clamp(start);
  for (int j = 0; j < 4; ++j) {
    Coords x = simplex[0];
    x[j] += (j == 1) ? 0.25 * std::exp(x[3]) : 0.1;
    simplex[j + 1] = p.clamp(x);
  }
  for (int k = 0; k < 5; ++k) values[k] = p.objective(simplex[k]);

  double best = *std::min_element(values.begin(), values.end());
  int iter = 0;
  bool converged = false;
  const int max_iter = 20 * opt.max_iter;
  for (; iter < max_iter; ++iter) {
    std::array<int, 5> order{0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int lo = order[0], hi = order[4], second = order[3];
    const double spread = values[hi] - values[lo];
    if (spread <= opt.rel_tol * std::max(values[lo], 1e-300)) {
      converged = true;
      break;
    }
    Coords centroid = Coords::Zero();
    for (int k = 0; k < 5; ++k)
      if (k != hi) centroid += simplex[k];
    centroid /= 4.0;

    auto try_point = [&](double t) {
      Coords x = p.clamp(centroid + t * (simplex[hi] - centroid));
      return std::pair{x, p.objective(x)};
    };
    auto [xr, fr] = try_point(-1.0);
    if (fr < values[lo]) {
      auto [xe, fe] = try_point(-2.0);
      if (fe < fr) {
        simplex[hi] = xe, values[hi] = fe;
      } else {
        simplex[hi] = xr, values[hi] = fr;
      }
    } else if (fr < values[second]) {
      simplex[hi] = xr, values[hi] = fr;
    } else {
      auto [xc, fc] = try_point(fr < values[hi] ? -0.5 : 0.5);
      if (fc < std::min(fr, values[hi])) {
        simplex[hi] = xc, values[hi] = fc;
      } else {
        for (int k = 0; k < 5; ++k) {
          if (k == lo) continue;
          simplex[k] = p.clamp(simplex[lo] + 0.5 * (simplex[k] - simplex[lo]));
          values[k] = p.objective(simplex[k]);
        }
      }
    }
    const double now = *std::min_element(values.begin(), values.end());
    if (now < best) {
      best = now;
      trace.push_back(now);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return {simplex[static_cast<std::size_t>(it - values.begin())], *it, iter, converged};
}

}  // namespace

double chi_squared(const SpectralParams& v, const AveragedSpectrum& sp, const FitWindow& window) {
  double sum = 0.0;
  for (std::size_t i = 0; i < sp.nu.size(); ++i) {
    if (!window.contains(sp.nu[i])) continue;
    const double r = 1.0 - sp.s_bar[i] / eval_psd(v, sp.nu[i]);
    sum += r * r;
  }
  return sum;
}

SpectralParams initial_guess(const AveragedSpectrum& sp, const FitWindow& window) {
  const auto data = select_window(sp, window);
  const std::size_t n = data.nu.size();
  if (n < kMinBins) throw std::invalid_argument("fit window holds fewer than 8 bins");

  const std::size_t quarter = std::max<std::size_t>(1, n / 4);
  std::vector<double> outer(data.s.begin(), data.s.begin() + quarter);
  outer.insert(outer.end(), data.s.end() - quarter, data.s.end());
  double s_ph = median(outer);
  if (!(s_ph > 0)) s_ph = std::max(*std::max_element(data.s.begin(), data.s.end()), 1e-300);

  const auto peak_it = std::max_element(data.s.begin(), data.s.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - data.s.begin());
  const double floor = 1e-6 * s_ph;
  const double s_at = std::max(*peak_it - s_ph, floor);

  const double spacing = (data.nu.back() - data.nu.front()) / static_cast<double>(n - 1);
  double width = window.width() / 4.0;
  if (*peak_it - s_ph > floor) {
    const double half = s_ph + 0.5 * s_at;
    auto crossing = [&](std::size_t above, std::size_t below) {
      const double t = (data.s[above] - half) / (data.s[above] - data.s[below]);
      return data.nu[above] + t * (data.nu[below] - data.nu[above]);
    };
    std::optional<double> left, right;
    for (std::size_t i = peak; i > 0; --i) {
      if (data.s[i - 1] <= half) {
        left = crossing(i, i - 1);
        break;
      }
    }
    for (std::size_t i = peak; i + 1 < n; ++i) {
      if (data.s[i + 1] <= half) {
        right = crossing(i, i + 1);
        break;
      }
    }
    if (left && right) {
      width = *right - *left;
    } else if (left) {
      width = 2.0 * (data.nu[peak] - *left);
    } else if (right) {
      width = 2.0 * (*right - data.nu[peak]);
    }
    width = std::max(width, spacing);
  }
  return {s_ph, data.nu[peak], s_at, width};
}

FitResult mle_fit(const AveragedSpectrum& sp, const FitWindow& window, const std::optional<SpectralParams>& guess,
                  const FitOptions& options) {
  auto data = select_window(sp, window);
  if (data.nu.size() < kMinBins) throw std::invalid_argument("fit window holds fewer than 8 bins");
  SpectralParams start = guess ? *guess : initial_guess(sp, window);
  start.validate();
  if (start.s_at <= 0) start.s_at = 1e-6 * start.s_ph;

  const Problem problem(std::move(data), window);
  FitResult result;
  result.window = window;

  Coords x = problem.clamp(Problem::to_coords(start));
  double f = problem.objective(x);
  result.trace.push_back(f);

  double lambda = 1e-3;
  bool converged = false;
  bool fallback = false;
  int iter = 0;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  while (iter < options.max_iter && !converged) {
    ++iter;
    if (f == 0.0) {
      converged = true;
      break;
    }
    problem.linearize(x, r, jac);
    const Eigen::Matrix4d normal = jac.transpose() * jac;
    const Eigen::Vector4d rhs = -(jac.transpose() * r);
    if (!well_conditioned(normal)) {
      fallback = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Eigen::Matrix4d damped = normal;
      damped.diagonal() *= (1.0 + lambda);
      const Coords step = damped.ldlt().solve(rhs);
      const Coords trial = problem.clamp(x + step);
      const double f_trial = problem.objective(trial);
      if (f_trial < f) {
        accepted = true;
        const double decrease = f - f_trial;
        const double moved = Problem::step_norm(trial - x, x);
        x = trial;
        const double f_old = f;
        f = f_trial;
        result.trace.push_back(f);
        lambda = std::max(lambda / 3.0, 1e-12);
        if (decrease <= options.rel_tol * f_old || moved < options.step_tol) converged = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) {
      // No descent direction left within rounding: x is a local minimum.
      converged = true;
    }
  }

  if (fallback) {
    auto out = nelder_mead(problem, x, options, result.trace);
    x = out.x;
    f = out.f;
    iter += out.iterations;
    converged = out.converged;
  }

  result.v_hat = Problem::to_params(x);
  result.chi2 = f;
  result.n_iter = iter;
  result.converged = converged;
  return result;
}

SampleCovariance sample_covariance(std::span<const SpectralParams> fits) {
  if (fits.size() < 2) throw std::invalid_argument("sample_covariance needs at least 2 samples");
  std::vector<std::array<double, 4>> rows;
  rows.reserve(fits.size());
  for (const auto& v : fits) rows.push_back({v.s_ph, v.nu_l, v.s_at, v.delta_nu});
  // Fixed summation order makes the result independent of input order.
  std::sort(rows.begin(), rows.end());

  const double n = static_cast<double>(rows.size());
  SampleCovariance out;
  out.n_samples = static_cast<int>(rows.size());
  for (const auto& row : rows)
    for (int a = 0; a < 4; ++a) out.mean[a] += row[a];
  out.mean /= n;
  for (const auto& row : rows) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a; b < 4; ++b) out.gamma(a, b) += (row[a] - out.mean[a]) * (row[b] - out.mean[b]);
    }
  }
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      out.gamma(a, b) /= n;
      out.gamma(b, a) = out.gamma(a, b);
    }
  }
  return out;
}

namespace {

// Power sums of the data shifted to its mean. The k-statistics are shift
// invariant, so this only improves the conditioning of the cancellations.
struct PowerSums {
  double m, s1, s2, s3, s4;
};

PowerSums centered_power_sums(std::span<const double> x) {
  const double origin = x.front();
  double offset = 0.0;
  for (double xi : x) offset += xi - origin;
  const double center = origin + offset / static_cast<double>(x.size());
  PowerSums p{static_cast<double>(x.size()), 0, 0, 0, 0};
  for (double xi : x) {
    const double d = xi - center;
    const double d2 = d * d;
    p.s1 += d;
    p.s2 += d2;
    p.s3 += d2 * d;
    p.s4 += d2 * d2;
  }
  return p;
}

double k2_from(const PowerSums& p) { return (p.m * p.s2 - p.s1 * p.s1) / (p.m * (p.m - 1.0)); }

double k4_from(const PowerSums& p) {
  const double m = p.m;
  const double s1_2 = p.s1 * p.s1;
  const double num = -6.0 * s1_2 * s1_2 + 12.0 * m * s1_2 * p.s2 - 3.0 * m * (m - 1.0) * p.s2 * p.s2 -
                     4.0 * m * (m + 1.0) * p.s1 * p.s3 + m * m * (m + 1.0) * p.s4;
  return num / (m * (m - 1.0) * (m - 2.0) * (m - 3.0));
}

}  // namespace

double k2(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("k2 needs at least 2 observations");
  return k2_from(centered_power_sums(x));
}

double k4(std::span<const double> x) {
  if (x.size() < 4) throw std::invalid_argument("k4 needs at least 4 observations");
  return k4_from(centered_power_sums(x));
}

double var_k2(std::span<const double> x) {
  if (x.size() < 4) throw std::invalid_argument("var_k2 needs at least 4 observations");
  const auto p = centered_power_sums(x);
  const double m = p.m;
  const double k2v = k2_from(p);
  return (2.0 * m * k2v * k2v + (m - 1.0) * k4_from(p)) / (m * (m + 1.0));
}

}  // namespace noisespec
