#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "epps/random.hpp"
#include "epps/types.hpp"

namespace testutil {

/// Pearson correlation, straightforward two-pass form.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// One-sample Kolmogorov-Smirnov statistic against Exp(rate).
inline double ks_exponential(std::vector<double> x, double rate) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

inline std::vector<double> gaps(const std::vector<double>& t) {
  std::vector<double> g;
  for (std::size_t i = 1; i < t.size(); ++i) g.push_back(t[i] - t[i - 1]);
  return g;
}

/// Random strictly increasing tick series on [0, horizon].
inline epps::TickSeries random_ticks(epps::Rng& rng, std::size_t n, double horizon) {
  std::vector<double> t(n);
  for (auto& v : t) v = rng.uniform() * horizon;
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  epps::TickSeries s;
  s.arrivals.horizon = horizon;
  s.arrivals.times = t;
  double x = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    x += rng.normal();
    s.values.push_back(x);
  }
  return s;
}

} // namespace testutil
