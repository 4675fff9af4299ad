#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>

#include "epps/error.hpp"
#include "epps/numeric.hpp"
#include "epps/sampling.hpp"
#include "epps/types.hpp"

namespace epps {

enum class Method { measured, overlap, flat_trade, hayashi_yoshida };

inline const char* to_string(Method m) {
  switch (m) {
  case Method::measured: return "measured";
  case Method::overlap: return "overlap";
  case Method::flat_trade: return "flat_trade";
  case Method::hayashi_yoshida: return "hayashi_yoshida";
  }
  return "?";
}

/// Expected interval overlaps (seconds) at one dt.
struct OverlapStats {
  double kappa_ii = 0.0;
  double kappa_jj = 0.0;
  double kappa_ij = 0.0;
  std::size_t windows = 0; ///< number of evaluation times averaged over
};

/// A correlation estimate with whatever diagnostics the method produced.
/// rho is not clamped to [-1, 1]; the corrections can leave that range.
struct CorrelationEstimate {
  double rho = 0.0;
  Method method = Method::measured;
  std::optional<double> dt; ///< absent for Hayashi-Yoshida
  double cov_ij = std::numeric_limits<double>::quiet_NaN();
  double var_i = std::numeric_limits<double>::quiet_NaN();
  double var_j = std::numeric_limits<double>::quiet_NaN();
  std::optional<OverlapStats> overlap;
  std::optional<double> p_i, p_j;
};

//---------------------------------------------------------------------------//
// Realised covariance on previous-tick grids                                //
//---------------------------------------------------------------------------//

inline void require_same_grid(const GridSeries& gi, const GridSeries& gj) {
  if (gi.dt != gj.dt)
    throw ShapeError("grids have different dt (" + std::to_string(gi.dt) + " vs " +
                     std::to_string(gj.dt) + ")");
  if (gi.size() != gj.size())
    throw ShapeError("grids have different lengths (" + std::to_string(gi.size()) + " vs " +
                     std::to_string(gj.size()) + ")");
}

/// sum_{h=1}^{n} (X^i_h - X^i_{h-1}) (X^j_h - X^j_{h-1})
inline double realised_covariance(const GridSeries& gi, const GridSeries& gj) {
  require_same_grid(gi, gj);
  CompensatedSum acc;
  for (std::size_t h = 1; h < gi.size(); ++h)
    acc += (gi.values[h] - gi.values[h - 1]) * (gj.values[h] - gj.values[h - 1]);
  return acc.value();
}

inline CorrelationEstimate measured_correlation(const GridSeries& gi, const GridSeries& gj) {
  require_same_grid(gi, gj);
  CorrelationEstimate e;
  e.method = Method::measured;
  e.dt = gi.dt;
  e.var_i = realised_covariance(gi, gi);
  e.var_j = realised_covariance(gj, gj);
  e.cov_ij = realised_covariance(gi, gj);
  if (!(e.var_i > 0.0) || !(e.var_j > 0.0)) {
    const int leg = !(e.var_i > 0.0) && !(e.var_j > 0.0) ? 2 : (!(e.var_i > 0.0) ? 0 : 1);
    throw DegenerateVarianceError("realised variance is zero (flat series) on leg " +
                                      std::to_string(leg),
                                  leg);
  }
  e.rho = e.cov_ij / std::sqrt(e.var_i * e.var_j);
  return e;
}

//---------------------------------------------------------------------------//
// Hayashi-Yoshida                                                           //
//---------------------------------------------------------------------------//

/// Sum of return products over every pair of overlapping half-open tick
/// intervals (t_{l-1}, t_l] x (t_{k-1}, t_k]. Two-cursor sweep: the first
/// candidate j-interval only moves forward as the i-interval advances.
inline double hayashi_yoshida_covariance(const TickSeries& si, const TickSeries& sj) {
  const auto& ti = si.times();
  const auto& tj = sj.times();
  const std::size_t n = ti.size(), m = tj.size();
  if (n < 2 || m < 2) return 0.0;
  CompensatedSum acc;
  std::size_t start = 1; // first j-interval whose right end is beyond the current left end
  for (std::size_t l = 1; l < n; ++l) {
    const double a = ti[l - 1], b = ti[l];
    while (start < m && tj[start] <= a) ++start;
    const double ri = si.values[l] - si.values[l - 1];
    if (ri == 0.0) continue;
    for (std::size_t k = start; k < m && tj[k - 1] < b; ++k)
      acc += ri * (sj.values[k] - sj.values[k - 1]);
  }
  return acc.value();
}

/// Sum of squared tick returns (the Hayashi-Yoshida variance of one series).
inline double hayashi_yoshida_variance(const TickSeries& s) {
  CompensatedSum acc;
  for (std::size_t l = 1; l < s.size(); ++l) {
    const double r = s.values[l] - s.values[l - 1];
    acc += r * r;
  }
  return acc.value();
}

inline CorrelationEstimate hayashi_yoshida(const TickSeries& si, const TickSeries& sj) {
  if (si.size() < 2 || sj.size() < 2)
    throw InsufficientDataError("Hayashi-Yoshida needs >= 2 observations per series (got " +
                                std::to_string(si.size()) + ", " + std::to_string(sj.size()) +
                                ")");
  CorrelationEstimate e;
  e.method = Method::hayashi_yoshida;
  e.var_i = hayashi_yoshida_variance(si);
  e.var_j = hayashi_yoshida_variance(sj);
  if (!(e.var_i > 0.0) || !(e.var_j > 0.0)) {
    const int leg = !(e.var_i > 0.0) && !(e.var_j > 0.0) ? 2 : (!(e.var_i > 0.0) ? 0 : 1);
    throw DegenerateVarianceError("Hayashi-Yoshida variance is zero on leg " + std::to_string(leg),
                                  leg);
  }
  e.cov_ij = hayashi_yoshida_covariance(si, sj);
  e.rho = e.cov_ij / std::sqrt(e.var_i * e.var_j);
  return e;
}

//---------------------------------------------------------------------------//
// Overlap correction                                                        //
//---------------------------------------------------------------------------//

namespace detail {

/// gamma(t) = max{t_k <= t}, walked forward over non-decreasing t.
class PreviousTickCursor {
public:
  explicit PreviousTickCursor(const std::vector<double>& times) : times_(&times) {}
  double at(double t) {
    while (k_ < times_->size() && (*times_)[k_] <= t) ++k_;
    return (*times_)[k_ - 1]; // caller guarantees t >= first time
  }

private:
  const std::vector<double>* times_;
  std::size_t k_ = 0;
};

} // namespace detail

/// Average overlap lengths of the previous-tick intervals
/// [gamma(t - dt), gamma(t)] at evaluation times t = q * stride, q >= 1,
/// t <= T, restricted to windows with t - dt at or after the first common
/// observation. stride = 0 means stride = dt, i.e. the realised covariance
/// grid.
inline OverlapStats overlap_expectation(const ArrivalSet& ui, const ArrivalSet& uj, double dt,
                                        double horizon, double stride = 0.0) {
  if (ui.empty() || uj.empty()) throw EmptyInputError("overlap expectation of an empty arrival set");
  if (!(dt > 0.0)) throw ParameterError("overlap dt must be > 0");
  if (stride == 0.0) stride = dt;
  if (!(stride > 0.0)) throw ParameterError("overlap stride must be > 0");

  const double start = std::max(ui.times.front(), uj.times.front());
  detail::PreviousTickCursor i_lo(ui.times), i_hi(ui.times), j_lo(uj.times), j_hi(uj.times);
  CompensatedSum sii, sjj, sij;
  std::size_t windows = 0;
  const auto q_max = static_cast<std::size_t>(std::floor(horizon / stride + 1e-9));
  for (std::size_t q = 1; q <= q_max; ++q) {
    const double t = static_cast<double>(q) * stride;
    if (t - dt < start) continue;
    const double a_i = i_lo.at(t - dt), b_i = i_hi.at(t);
    const double a_j = j_lo.at(t - dt), b_j = j_hi.at(t);
    sii += b_i - a_i;
    sjj += b_j - a_j;
    sij += std::max(0.0, std::min(b_i, b_j) - std::max(a_i, a_j));
    ++windows;
  }
  if (windows == 0)
    throw InsufficientDataError("no evaluation window starts after the first common observation");
  const auto w = static_cast<double>(windows);
  return {sii.value() / w, sjj.value() / w, sij.value() / w, windows};
}

/// rho = rho_tilde * sqrt(kappa_ii kappa_jj) / kappa_ij
inline CorrelationEstimate overlap_correction(double rho_tilde, const OverlapStats& stats) {
  if (!(stats.kappa_ij > 0.0)) throw NoOverlapError("overlap correction undefined: kappa_ij = 0");
  CorrelationEstimate e;
  e.method = Method::overlap;
  e.rho = rho_tilde * std::sqrt(stats.kappa_ii * stats.kappa_jj) / stats.kappa_ij;
  e.overlap = stats;
  return e;
}

//---------------------------------------------------------------------------//
// Flat-trade correction                                                     //
//---------------------------------------------------------------------------//

/// Fraction of grid returns exactly equal to zero.
inline double flat_trade_probability(const GridSeries& g) {
  if (g.intervals() == 0) throw InsufficientDataError("flat-trade probability needs >= 1 return");
  std::size_t flat = 0;
  for (std::size_t h = 1; h < g.size(); ++h)
    if (g.values[h] - g.values[h - 1] == 0.0) ++flat;
  return static_cast<double>(flat) / static_cast<double>(g.intervals());
}

/// rho = rho_tilde * (1 - p_i p_j) / ((1 - p_i)(1 - p_j))
inline CorrelationEstimate flat_trade_correction(double rho_tilde, double p_i, double p_j) {
  if (!(p_i >= 0.0 && p_i <= 1.0) || !(p_j >= 0.0 && p_j <= 1.0))
    throw ParameterError("flat-trade probabilities must lie in [0, 1]");
  if (p_i == 1.0 || p_j == 1.0)
    throw SaturationError("flat-trade correction undefined: a leg never moves (p = 1)");
  CorrelationEstimate e;
  e.method = Method::flat_trade;
  e.rho = rho_tilde * (1.0 - p_i * p_j) / ((1.0 - p_i) * (1.0 - p_j));
  e.p_i = p_i;
  e.p_j = p_j;
  return e;
}

//---------------------------------------------------------------------------//
// Analytic Epps curve under Poisson sampling                                //
//---------------------------------------------------------------------------//

/// c * (1 + (exp(-lambda dt) - 1) / (lambda dt))
inline double theoretical_poisson_epps(double c, double lambda, double dt) {
  if (!(lambda > 0.0) || !(dt > 0.0)) throw DomainError("Poisson Epps curve needs lambda, dt > 0");
  const double x = lambda * dt;
  if (x < 1e-4) // series of (x - 1 + e^{-x}) / x, avoids the 1 + (-1 + ...) cancellation
    return c * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)));
  return c * (1.0 + std::expm1(-x) / x);
}

} // namespace epps
