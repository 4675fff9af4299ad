#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "epps/error.hpp"
#include "epps/numeric.hpp"

namespace epps {

/// Two-sided Student-t multiplier t_{(1 + confidence) / 2, dof}.
inline double student_t_multiplier(double confidence, double dof) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ParameterError("confidence must lie in (0, 1)");
  if (!(dof > 0.0)) throw ParameterError("t quantile needs dof > 0");
  const boost::math::students_t dist(dof);
  return boost::math::quantile(dist, 0.5 * (1.0 + confidence));
}

inline double mean_of(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s += v;
  return s.value() / static_cast<double>(values.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_sd(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  CompensatedSum s;
  for (double v : values) s += (v - mean) * (v - mean);
  return std::sqrt(s.value() / static_cast<double>(values.size() - 1));
}

struct Ribbon {
  double mean = 0.0;
  double half_width = 0.0;
};

/// mean +- t_{(1+conf)/2, n-1} * sd across replications.
///
/// The band uses the cross-replication standard deviation itself, not the
/// standard error, so it approximates where 95% of individual estimates fall.
inline Ribbon ribbon(std::span<const double> values, double confidence) {
  if (values.size() < 2)
    throw InsufficientDataError("ribbon needs >= 2 values (got " + std::to_string(values.size()) +
                                ")");
  Ribbon r;
  r.mean = mean_of(values);
  const double sd = sample_sd(values, r.mean);
  r.half_width = sd == 0.0 ? 0.0
                           : student_t_multiplier(confidence,
                                                  static_cast<double>(values.size() - 1)) * sd;
  return r;
}

} // namespace epps
