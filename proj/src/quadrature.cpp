#include "noisespec/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "noisespec/errors.hpp"

namespace noisespec {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Piece {
  double a, b;
  Mat4 value;
  Mat4 error;  // elementwise |Kronrod - Gauss|
  double score = 0.0;
};

Piece evaluate(const std::function<Mat4(double)>& f, double a, double b) {
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);

  // Node 0 is the midpoint; odd Gauss order means it is shared by both rules.
  const Mat4 center = f(mid);
  Mat4 kron = center * wk[0];
  Mat4 gauss = center * wg[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const Mat4 pair = f(mid + half * x[i]) + f(mid - half * x[i]);
    kron += pair * wk[i];
    if (i % 2 == 0) gauss += pair * wg[i / 2];
  }
  kron *= half;
  gauss *= half;
  return {a, b, kron, (kron - gauss).cwiseAbs(), 0.0};
}

double scaled_error(const Mat4& err, const Mat4& total) {
  double worst = 0.0;
  for (int j = 0; j < 4; ++j) {
    for (int k = j; k < 4; ++k) {
      const double scale = std::sqrt(std::abs(total(j, j) * total(k, k)));
      if (scale > 0) {
        worst = std::max(worst, err(j, k) / scale);
      } else if (err(j, k) > 0) {
        worst = std::max(worst, err(j, k) / std::max(std::abs(total(j, k)), 1e-300));
      }
    }
  }
  return worst;
}

}  // namespace

MatrixIntegral integrate_symmetric(const std::function<Mat4(double)>& f, double a, double b,
                                   std::span<const double> breaks, double rel_tol, int max_intervals) {
  std::vector<double> edges{a, b};
  for (double x : breaks)
    if (x > a && x < b) edges.push_back(x);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) pieces.push_back(evaluate(f, edges[i], edges[i + 1]));

  auto totals = [&] {
    Mat4 value = Mat4::Zero(), error = Mat4::Zero();
    for (const auto& p : pieces) {
      value += p.value;
      error += p.error;
    }
    return std::pair{value, error};
  };

  for (;;) {
    auto [value, error] = totals();
    const double current = scaled_error(error, value);
    if (current <= rel_tol) {
      MatrixIntegral out;
      // Mirror the upper triangle so the result is exactly symmetric.
      for (int j = 0; j < 4; ++j)
        for (int k = j; k < 4; ++k) out.value(j, k) = out.value(k, j) = value(j, k);
      out.error = current;
      out.intervals = static_cast<int>(pieces.size());
      return out;
    }
    if (static_cast<int>(pieces.size()) >= max_intervals)
      throw NumericalError("quadrature did not reach the requested tolerance");
    for (auto& p : pieces) p.score = scaled_error(p.error, value);
    auto worst = std::max_element(pieces.begin(), pieces.end(),
                                  [](const Piece& l, const Piece& r) { return l.score < r.score; });
    const double mid = 0.5 * (worst->a + worst->b);
    Piece right = evaluate(f, mid, worst->b);
    *worst = evaluate(f, worst->a, mid);
    pieces.push_back(std::move(right));
  }
}

}  // namespace noisespec
