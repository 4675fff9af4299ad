#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "epps/error.hpp"

namespace epps {

/// Strictly increasing event times on [0, horizon] for one component.
struct ArrivalSet {
  std::vector<double> times;
  double horizon = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }

  /// Throws RangeError when the invariants do not hold.
  void validate() const {
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (!(times[k] >= 0.0 && times[k] <= horizon))
        throw RangeError("arrival time " + std::to_string(times[k]) + " outside [0, " +
                         std::to_string(horizon) + "]");
      if (k > 0 && !(times[k] > times[k - 1]))
        throw RangeError("arrival times not strictly increasing at index " + std::to_string(k));
    }
  }
};

/// Irregular (time, log-price) observations of one asset.
struct TickSeries {
  ArrivalSet arrivals;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
  const std::vector<double>& times() const noexcept { return arrivals.times; }

  void validate() const {
    if (arrivals.size() != values.size())
      throw ShapeError("tick series has " + std::to_string(arrivals.size()) + " times but " +
                       std::to_string(values.size()) + " values");
    arrivals.validate();
    for (double v : values)
      if (!std::isfinite(v)) throw RangeError("tick series holds a non-finite value");
  }
};

/// Log-prices on the grid h * dt, h = 0 .. floor(T / dt).
struct GridSeries {
  double dt = 0.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  /// Number of return intervals.
  std::size_t intervals() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double time_at(std::size_t h) const noexcept { return static_cast<double>(h) * dt; }
};

/// Synchronous log-price pair on a uniform grid starting at t0.
struct PricePath {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<std::array<double, 2>> values;

  std::size_t size() const noexcept { return values.size(); }
  double time_at(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
  double end_time() const noexcept {
    return values.empty() ? t0 : time_at(values.size() - 1);
  }

  /// Extracts one asset as a tick series observed at every grid point.
  TickSeries leg(std::size_t asset) const {
    TickSeries s;
    s.arrivals.horizon = end_time();
    s.arrivals.times.reserve(values.size());
    s.values.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      s.arrivals.times.push_back(time_at(k));
      s.values.push_back(values[k][asset]);
    }
    return s;
  }
};

} // namespace epps
