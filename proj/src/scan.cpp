#include "noisespec/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "noisespec/errors.hpp"
#include "noisespec/fisher.hpp"
#include "noisespec/parallel.hpp"

namespace noisespec {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  out.back() = hi;
  return out;
}

bool strictly_ascending(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) return false;
  return true;
}

// Vertex of the parabola through three points; falls back to the middle point when the curvature is not
// positive.
double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curvature = (d12 - d01) / (x2 - x0);
  if (!(curvature > 0)) return x1;
  // d01 is the slope at the midpoint of [x0, x1]; the slope grows by 2*curvature per unit x.
  const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
  return std::clamp(vertex, x0, x2);
}

}  // namespace

GridSpec GridSpec::linear(double n_lo, double n_hi, std::size_t n_count, double p_lo, double p_hi,
                          std::size_t p_count) {
  return {linspace(n_lo, n_hi, n_count), linspace(p_lo, p_hi, p_count)};
}

void GridSpec::validate() const {
  if (n_values.empty() || p_values.empty()) throw std::invalid_argument("scan grid axes must be non-empty");
  if (!strictly_ascending(n_values) || !strictly_ascending(p_values))
    throw std::invalid_argument("scan grid axes must be sorted ascending");
}

std::optional<Mat4> crb_at(const ExperimentConditions& c, const InstrumentConstants& k, const AcquisitionConfig& cfg) {
  const auto v = params_from_conditions(c, k);
  const auto fr = fisher_integral(v, cfg.window, cfg.bin_spacing(), cfg.n_eff());
  return fr.gamma_th;
}

ScanGrid scan_grid(const GridSpec& grid, const InstrumentConstants& k, const AcquisitionConfig& cfg, double xi2,
                   unsigned threads) {
  grid.validate();
  k.validate();
  cfg.validate();
  if (!(xi2 > 0)) throw std::invalid_argument("xi2 must be > 0");

  ScanGrid out;
  out.n_values = grid.n_values;
  out.p_values = grid.p_values;
  out.xi2 = xi2;
  const std::size_t np = grid.p_values.size();
  const std::size_t cells = grid.n_values.size() * np;
  for (auto& s : out.surfaces) s.assign(cells, std::numeric_limits<double>::quiet_NaN());

  parallel_for(cells, threads, [&](std::size_t cell) {
    const ExperimentConditions c{grid.n_values[cell / np], grid.p_values[cell % np], xi2};
    std::optional<Mat4> gamma;
    try {
      gamma = crb_at(c, k, cfg);
    } catch (const std::invalid_argument&) {
      return;  // forward model undefined here
    }
    if (!gamma) return;
    for (int d = 0; d < 4; ++d) out.surfaces[static_cast<std::size_t>(d)][cell] = (*gamma)(d, d);
  });
  return out;
}

OptimumReport find_optimum(const ScanGrid& sg, int param_index) {
  if (param_index < 1 || param_index > 4) throw std::invalid_argument("param_index must be in 1..4");
  const auto& surface = sg.surfaces[static_cast<std::size_t>(param_index - 1)];
  const std::size_t nn = sg.n_values.size(), np = sg.p_values.size();
  if (surface.size() != nn * np) throw std::invalid_argument("surface size does not match grid");

  std::optional<std::size_t> best;
  for (std::size_t cell = 0; cell < surface.size(); ++cell) {
    if (!std::isfinite(surface[cell])) continue;
    if (!best || surface[cell] < surface[*best]) best = cell;
  }
  if (!best) throw std::invalid_argument("surface has no finite entries");

  const std::size_t i = *best / np, j = *best % np;
  OptimumReport r;
  r.param_index = param_index;
  r.n_opt = sg.n_values[i];
  r.p_opt = sg.p_values[j];
  r.gamma_min = surface[*best];
  r.interior = i > 0 && i + 1 < nn && j > 0 && j + 1 < np;
  if (r.interior) {
    auto val = [&](std::size_t a, std::size_t b) { return surface[a * np + b]; };
    const bool finite_cross = std::isfinite(val(i - 1, j)) && std::isfinite(val(i + 1, j)) &&
                              std::isfinite(val(i, j - 1)) && std::isfinite(val(i, j + 1));
    if (finite_cross) {
      r.n_refined = parabola_vertex(sg.n_values[i - 1], val(i - 1, j), sg.n_values[i], val(i, j), sg.n_values[i + 1],
                                    val(i + 1, j));
      r.p_refined = parabola_vertex(sg.p_values[j - 1], val(i, j - 1), sg.p_values[j], val(i, j), sg.p_values[j + 1],
                                    val(i, j + 1));
    }
  }
  return r;
}

Vec4 squeezing_gain(const ExperimentConditions& c, const InstrumentConstants& k, const AcquisitionConfig& cfg,
                    double xi2_a, double xi2_b) {
  if (!(xi2_a > 0) || !(xi2_b > 0)) throw std::invalid_argument("squeezing factors must be > 0");
  ExperimentConditions ca = c, cb = c;
  ca.xi2 = xi2_a;
  cb.xi2 = xi2_b;
  const auto ga = crb_at(ca, k, cfg);
  const auto gb = crb_at(cb, k, cfg);
  if (!ga || !gb) throw NumericalError("Fisher matrix is singular at the requested operating point");
  return gb->diagonal().cwiseQuotient(ga->diagonal());
}

}  // namespace noisespec
