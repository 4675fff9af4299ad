#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "epps/error.hpp"
#include "epps/random.hpp"
#include "epps/types.hpp"

namespace epps {

/// Length of the simulated trading day in seconds. Daily drift and variance
/// parameters are divided by this to obtain per-second rates.
inline constexpr double kSimulationDaySeconds = 72000.0;

/// Correlated Brownian log-price pair.
/// mu and sigma2 are per day; rho is the correlation of the driving noises.
struct GbmParams {
  std::array<double, 2> mu{0.01, 0.01};
  std::array<double, 2> sigma2{0.1, 0.2};
  double rho = 0.65;
  double dt = 1.0;
  double horizon = 72000.0;
  double day_length = kSimulationDaySeconds;
  std::array<double, 2> x0{0.0, 0.0};

  void validate() const {
    for (int i = 0; i < 2; ++i) {
      if (!std::isfinite(mu[i])) throw ParameterError("gbm.mu must be finite");
      // Zero variance is admitted for the drift-only degenerate case.
      if (!(sigma2[i] >= 0.0) || !std::isfinite(sigma2[i]))
        throw ParameterError("gbm.sigma2 must be >= 0");
      if (!std::isfinite(x0[i])) throw ParameterError("gbm.x0 must be finite");
    }
    if (!(std::abs(rho) <= 1.0)) throw ParameterError("gbm.rho must lie in [-1, 1]");
    if (!(dt > 0.0)) throw ParameterError("gbm.dt must be > 0");
    if (!(horizon > 0.0)) throw ParameterError("gbm.horizon must be > 0");
    if (!(day_length > 0.0)) throw ParameterError("gbm.day_length must be > 0");
    const double steps = horizon / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
      throw ParameterError("gbm.horizon must be a multiple of gbm.dt");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }
};

/// Merton jump diffusion: the diffusion part of GbmParams plus independent
/// compound Poisson jumps with log-normal sizes Y ~ LN(a, b^2).
struct MertonParams {
  GbmParams diffusion;
  std::array<double, 2> lambda{0.2, 0.2}; ///< jumps per second
  std::array<double, 2> a{0.0, 0.0};
  std::array<double, 2> b{0.001, 0.001};

  void validate() const {
    diffusion.validate();
    for (int i = 0; i < 2; ++i) {
      if (!(lambda[i] >= 0.0) || !std::isfinite(lambda[i]))
        throw ParameterError("merton.lambda must be >= 0");
      if (!(b[i] >= 0.0) || !std::isfinite(b[i])) throw ParameterError("merton.b must be >= 0");
      if (!std::isfinite(a[i])) throw ParameterError("merton.a must be finite");
    }
  }
};

namespace detail {

// Stream ids inside one simulation seed. Jumps draw from their own streams so
// switching jumps on or off leaves the diffusion draws untouched.
inline constexpr std::uint64_t kDiffusionStream = 0;
inline constexpr std::uint64_t kJumpStream[2] = {1, 2};

inline PricePath diffusion_path(const GbmParams& p, std::uint64_t seed) {
  const std::size_t n = p.steps();
  PricePath path;
  path.t0 = 0.0;
  path.dt = p.dt;
  path.values.resize(n + 1);
  path.values[0] = p.x0;

  std::array<double, 2> drift{}, vol{};
  for (int i = 0; i < 2; ++i) {
    const double mu_s = p.mu[i] / p.day_length;
    const double var_s = p.sigma2[i] / p.day_length;
    drift[i] = (mu_s - 0.5 * var_s) * p.dt;
    vol[i] = std::sqrt(var_s * p.dt);
  }
  // Lower-triangular square root of [[1, rho], [rho, 1]].
  const double l21 = p.rho;
  const double l22 = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));

  Rng rng(seed, kDiffusionStream);
  for (std::size_t k = 1; k <= n; ++k) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double w1 = z1;
    const double w2 = l21 * z1 + l22 * z2;
    path.values[k][0] = path.values[k - 1][0] + drift[0] + vol[0] * w1;
    path.values[k][1] = path.values[k - 1][1] + drift[1] + vol[1] * w2;
  }
  return path;
}

} // namespace detail

/// Euler-Maruyama simulation of the Brownian log-price pair
///   dX^i = (mu_i - sigma_i^2 / 2) dt + sigma_i dW^i,  d<W^1, W^2> = rho dt.
inline PricePath simulate_gbm(const GbmParams& params, std::uint64_t seed) {
  params.validate();
  return detail::diffusion_path(params, seed);
}

struct MertonPath {
  PricePath path;
  std::array<std::vector<double>, 2> jump_times;
};

/// Merton path with the jump arrival times exposed.
///
/// Jumps are added in log space: a jump at time t in (k dt, (k+1) dt] shifts
/// every grid value from k + 1 onwards by log Y ~ N(a, b^2).
inline MertonPath simulate_merton_detailed(const MertonParams& params, std::uint64_t seed) {
  params.validate();
  MertonPath out;
  out.path = detail::diffusion_path(params.diffusion, seed);
  const double horizon = params.diffusion.horizon;
  const double dt = params.diffusion.dt;
  const std::size_t n = out.path.size() - 1;

  for (int i = 0; i < 2; ++i) {
    if (params.lambda[i] == 0.0) continue;
    Rng rng(seed, detail::kJumpStream[i]);
    // shift[k] accumulates log jump sizes landing in step k.
    std::vector<double> shift(n + 1, 0.0);
    double t = 0.0;
    while (true) {
      t += rng.exponential(params.lambda[i]);
      if (t > horizon) break;
      const double log_y = params.a[i] + params.b[i] * rng.normal();
      auto k = static_cast<std::size_t>(std::ceil(t / dt));
      if (k == 0) k = 1;
      if (k > n) k = n;
      shift[k] += log_y;
      out.jump_times[i].push_back(t);
    }
    double cum = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      cum += shift[k];
      out.path.values[k][i] += cum;
    }
  }
  return out;
}

inline PricePath simulate_merton(const MertonParams& params, std::uint64_t seed) {
  return simulate_merton_detailed(params, seed).path;
}

} // namespace epps
