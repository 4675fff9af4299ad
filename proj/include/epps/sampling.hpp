#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "epps/error.hpp"
#include "epps/hawkes.hpp"
#include "epps/random.hpp"
#include "epps/types.hpp"

namespace epps {

/// Homogeneous Poisson arrivals: cumulative Exp(rate) draws truncated at T.
inline ArrivalSet poisson_arrivals(double rate, double horizon, std::uint64_t seed) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ParameterError("poisson rate must be > 0");
  if (!(horizon >= 0.0)) throw ParameterError("poisson horizon must be >= 0");
  ArrivalSet out;
  out.horizon = horizon;
  out.times.reserve(static_cast<std::size_t>(rate * horizon * 1.05) + 16);
  Rng rng(seed, 0);
  double t = 0.0;
  while (true) {
    const double next = t + rng.exponential(rate);
    if (next > horizon) break;
    if (next > t) out.times.push_back(next);
    t = next;
  }
  return out;
}

/// Two mutually exciting sampling processes (zero diagonal kernel).
inline std::pair<ArrivalSet, ArrivalSet> hawkes_arrivals(const HawkesSpec& spec, double horizon,
                                                         std::uint64_t seed) {
  spec.validate();
  if (spec.dim() != 2) throw ParameterError("hawkes sampler needs a 2-component spec");
  if (spec.alpha(0, 0) != 0.0 || spec.alpha(1, 1) != 0.0)
    throw ParameterError("hawkes sampler expects zero self-excitation (zero diagonal)");
  auto sets = simulate_hawkes(spec, horizon, seed);
  return {std::move(sets[0]), std::move(sets[1])};
}

/// Index of the greatest grid point <= t.
inline std::size_t grid_index_at_or_before(const PricePath& path, double t) {
  auto k = static_cast<std::size_t>(std::floor((t - path.t0) / path.dt));
  const std::size_t last = path.size() - 1;
  if (k > last) k = last;
  while (k + 1 <= last && path.time_at(k + 1) <= t) ++k;
  while (k > 0 && path.time_at(k) > t) --k;
  return k;
}

/// Observes one asset of a latent path at the given arrival times using the
/// previous-tick rule on the path grid.
inline TickSeries observe_path(const PricePath& path, std::size_t asset, const ArrivalSet& arrivals) {
  if (asset > 1) throw ParameterError("asset index must be 0 or 1");
  TickSeries s;
  s.arrivals = arrivals;
  if (arrivals.empty()) return s;
  if (path.values.empty()) throw RangeError("cannot observe an empty path");
  const double end = path.end_time();
  s.values.reserve(arrivals.size());
  for (double t : arrivals.times) {
    if (t < path.t0 || t > end)
      throw RangeError("arrival " + std::to_string(t) + " outside path domain [" +
                       std::to_string(path.t0) + ", " + std::to_string(end) + "]");
    s.values.push_back(path.values[grid_index_at_or_before(path, t)][asset]);
  }
  return s;
}

/// Number of whole dt intervals in [0, T].
inline std::size_t grid_intervals(double dt, double horizon) {
  if (!(dt > 0.0)) throw ParameterError("grid dt must be > 0");
  if (!(horizon >= 0.0)) throw ParameterError("grid horizon must be >= 0");
  return static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
}

/// Previous-tick synchronisation onto h * dt, h = 0 .. floor(T / dt).
///
/// The value at h * dt is the last observation at or before it. Grid points
/// before the first observation carry the first observed value, so they
/// contribute zero returns.
inline GridSeries previous_tick_grid(const TickSeries& series, double dt, double horizon) {
  if (series.empty()) throw EmptyInputError("previous-tick grid of an empty series");
  if (series.values.size() != series.arrivals.size())
    throw ShapeError("tick series times/values length mismatch");
  const std::size_t n = grid_intervals(dt, horizon);
  GridSeries g;
  g.dt = dt;
  g.values.resize(n + 1);
  const auto& times = series.times();
  std::size_t k = 0; // number of observations at or before the current grid time
  for (std::size_t h = 0; h <= n; ++h) {
    const double t = static_cast<double>(h) * dt;
    while (k < times.size() && times[k] <= t) ++k;
    g.values[h] = k == 0 ? series.values.front() : series.values[k - 1];
  }
  return g;
}

/// Grid series viewed as a tick series observed at every grid point.
inline TickSeries to_tick_series(const GridSeries& g) {
  TickSeries s;
  s.arrivals.horizon = g.time_at(g.intervals());
  for (std::size_t h = 0; h < g.size(); ++h) {
    s.arrivals.times.push_back(g.time_at(h));
    s.values.push_back(g.values[h]);
  }
  return s;
}

/// Every k-th arrival: 1-based indices k, 2k, ..., floor(#U / k) * k.
inline ArrivalSet k_skip(const ArrivalSet& arrivals, std::size_t k) {
  if (k == 0) throw ParameterError("k-skip needs k >= 1");
  ArrivalSet out;
  out.horizon = arrivals.horizon;
  out.times.reserve(arrivals.size() / k);
  for (std::size_t idx = k; idx <= arrivals.size(); idx += k) out.times.push_back(arrivals.times[idx - 1]);
  return out;
}

inline TickSeries k_skip(const TickSeries& series, std::size_t k) {
  if (k == 0) throw ParameterError("k-skip needs k >= 1");
  TickSeries out;
  out.arrivals.horizon = series.arrivals.horizon;
  for (std::size_t idx = k; idx <= series.size(); idx += k) {
    out.arrivals.times.push_back(series.arrivals.times[idx - 1]);
    out.values.push_back(series.values[idx - 1]);
  }
  return out;
}

} // namespace epps
