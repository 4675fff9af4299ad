#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "epps/hawkes.hpp"
#include "epps/sampling.hpp"
#include "epps/stats.hpp"
#include "test_util.hpp"

using namespace epps;

namespace {

const HawkesPriceParams kDefault{};

/// Brute-force intensity: full double loop over the history.
std::vector<double> brute_intensity(const HawkesSpec& s, const std::vector<ArrivalSet>& h, double t) {
  std::vector<double> out;
  for (std::size_t m = 0; m < s.dim(); ++m) {
    double v = s.lambda0(m);
    for (std::size_t n = 0; n < h.size(); ++n)
      for (double e : h[n].times)
        if (e < t) v += s.alpha(m, n) * std::exp(-s.beta(m, n) * (t - e));
    out.push_back(v);
  }
  return out;
}

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0;
  for (double a : c) v = v * x + a;
  return v;
}

/// Largest |real root| of a polynomial by bisection on sign changes over
/// [-3, 3]. No eigen solver involved.
double largest_root_magnitude(const std::vector<double>& coeffs) {
  double best = 0;
  const double step = 1e-4;
  for (double x = -3; x < 3; x += step) {
    const double a = poly_eval(coeffs, x), b = poly_eval(coeffs, x + step);
    if (a == 0 || a * b < 0) {
      double lo = x, hi = x + step;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (poly_eval(coeffs, lo) * poly_eval(coeffs, mid) <= 0) hi = mid; else lo = mid;
      }
      best = std::max(best, std::abs(0.5 * (lo + hi)));
    }
  }
  return best;
}

std::vector<double> grid_increments(const PricePath& p, std::size_t asset, std::size_t h) {
  std::vector<double> out;
  for (std::size_t k = h; k < p.size(); k += h) out.push_back(p.values[k][asset] - p.values[k - h][asset]);
  return out;
}

} // namespace

TEST(Branching, ZeroKernelGivesZeroMatrix) {
  const auto s = mutual_excitation_spec(0.1, 0.0, 1.0);
  EXPECT_TRUE(branching_matrix(s).gamma.isZero());
  const auto r = classify_stability(branching_matrix(s));
  EXPECT_EQ(r.classification, Stability::stationary);
  EXPECT_EQ(r.spectral_radius, 0.0);
}

TEST(Branching, DefaultRatios) {
  const auto g = branching_matrix(mutual_excitation_spec(0.015, 0.023, 0.11)).gamma;
  EXPECT_NEAR(g(0, 1), 0.023 / 0.11, 1e-15);
  EXPECT_NEAR(g(0, 1), 0.20909, 1e-5);
  EXPECT_EQ(g(0, 0), 0.0);
  const auto g4 = branching_matrix(kDefault.spec()).gamma;
  EXPECT_NEAR(g4(0, 1), 0.20909, 1e-5);
  EXPECT_NEAR(g4(0, 2), 0.45454, 1e-5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      EXPECT_EQ(g4(i, j) == 0.0, kDefault.spec().alpha(i, j) == 0.0);
}

TEST(Branching, SpectralRadiusMatchesCharacteristicPolynomial) {
  const double a = 0.023 / 0.11;
  // [[0,a],[a,0]]: x^2 - a^2
  const double two = largest_root_magnitude({1.0, 0.0, -a * a});
  const auto r2 = classify_stability(branching_matrix(mutual_excitation_spec(0.015, 0.023, 0.11)));
  EXPECT_NEAR(r2.spectral_radius, two, 1e-9);
  EXPECT_NEAR(r2.spectral_radius, 0.20909, 1e-5);

  // 4x4 layout: eigenvalues +-g12 +-g13, characteristic polynomial
  // ((x - g12)^2 - g13^2)((x + g12)^2 - g13^2)
  const double g12 = kDefault.gamma12(), g13 = kDefault.gamma13();
  const double p = g12 * g12 - g13 * g13;
  // expand (x^2 - 2 g12 x + p)(x^2 + 2 g12 x + p)
  const std::vector<double> quartic{1.0, 0.0, 2 * p - 4 * g12 * g12, 0.0, p * p};
  const auto r4 = classify_stability(branching_matrix(kDefault.spec()));
  EXPECT_NEAR(r4.spectral_radius, largest_root_magnitude(quartic), 1e-9);
  EXPECT_NEAR(r4.spectral_radius, g12 + g13, 1e-12);
  EXPECT_NEAR(r4.spectral_radius, 0.66364, 1e-5);
  EXPECT_EQ(r4.classification, Stability::stationary);
}

TEST(Branching, CriticalAndSupercritical) {
  BranchingMatrix b;
  b.gamma = Eigen::Matrix2d{{0.0, 1.0}, {1.0, 0.0}};
  EXPECT_EQ(classify_stability(b).classification, Stability::quasi_stationary);
  b.gamma = Eigen::Matrix2d{{0.0, 1.2}, {1.2, 0.0}};
  EXPECT_EQ(classify_stability(b).classification, Stability::non_stationary);
  // complex eigenvalues: rotation-like matrix with modulus 1.1
  b.gamma = Eigen::Matrix2d{{0.0, 1.1}, {-1.1, 0.0}};
  EXPECT_NEAR(classify_stability(b).spectral_radius, 1.1, 1e-12);
}

TEST(Intensity, EmptyHistoryIsBaseline) {
  const auto s = kDefault.spec();
  const auto v = intensity_at(s, std::vector<ArrivalSet>(4), 123.0);
  for (int m = 0; m < 4; ++m) EXPECT_EQ(v(m), s.lambda0(m));
}

TEST(Intensity, SingleEventDecaysByOneOverE) {
  const auto s = mutual_excitation_spec(0.015, 0.023, 0.11);
  std::vector<ArrivalSet> h(2);
  h[1].times = {5.0};
  const auto v = intensity_at(s, h, 5.0 + 1.0 / 0.11);
  EXPECT_NEAR(v(0), 0.015 + 0.023 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(v(1), 0.015);
  // events at or after t are ignored
  EXPECT_EQ(intensity_at(s, h, 5.0)(0), 0.015);
}

TEST(Intensity, RecursionMatchesBruteForce) {
  Rng rng(77, 0);
  for (int trial = 0; trial < 5; ++trial) {
    HawkesSpec s;
    s.lambda0 = Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform());
    s.alpha = Eigen::Matrix3d::Zero();
    s.beta = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        s.alpha(i, j) = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        s.beta(i, j) = 0.01 + 2.0 * rng.uniform();
      }
    std::vector<ArrivalSet> h(3);
    for (int e = 0; e < 1000; ++e) h[static_cast<std::size_t>(e % 3)].times.push_back(rng.uniform() * 500.0);
    for (auto& a : h) std::sort(a.times.begin(), a.times.end());
    for (double t : {0.5, 100.0, 250.0, 499.0, 600.0}) {
      const auto fast = intensity_at(s, h, t);
      const auto slow = brute_intensity(s, h, t);
      for (int m = 0; m < 3; ++m) {
        EXPECT_NEAR(fast(m), slow[static_cast<std::size_t>(m)], 1e-10);
        EXPECT_GE(fast(m), s.lambda0(m));
      }
    }
  }
}

TEST(HawkesSim, PoissonDegeneracy) {
  const auto s = mutual_excitation_spec(1.0 / 15.0, 0.0, 1.0);
  const auto sets = simulate_hawkes(s, 72000.0, 2024);
  for (const auto& a : sets) {
    EXPECT_NEAR(static_cast<double>(a.size()), 4800.0, 3.0 * std::sqrt(4800.0));
    const auto g = testutil::gaps(a.times);
    EXPECT_LT(testutil::ks_exponential(g, 1.0 / 15.0), testutil::ks_critical_1pct(g.size()));
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a.times[i - 1], a.times[i]);
  }
}

TEST(HawkesSim, StationaryRateOfSamplingSpec) {
  const auto s = mutual_excitation_spec(0.015, 0.023, 0.11);
  const double expected = 0.015 / (1.0 - 0.023 / 0.11);
  EXPECT_NEAR(stationary_rates(s)(0), expected, 1e-12);
  EXPECT_NEAR(expected, 0.018966, 1e-6);
  double events = 0;
  const int seeds = 5;
  const double horizon = 720000.0;
  for (int k = 0; k < seeds; ++k) {
    const auto sets = simulate_hawkes(s, horizon, 300 + k);
    events += static_cast<double>(sets[0].size() + sets[1].size());
  }
  EXPECT_NEAR(events / (2.0 * seeds * horizon) / expected, 1.0, 0.05);
}

TEST(HawkesSim, ZeroHorizonIsEmptyAndSupercriticalIsRejected) {
  const auto sets = simulate_hawkes(mutual_excitation_spec(0.015, 0.023, 0.11), 0.0, 1);
  for (const auto& a : sets) EXPECT_TRUE(a.empty());
  const auto bad = mutual_excitation_spec(0.015, 0.2, 0.11);
  EXPECT_THROW(simulate_hawkes(bad, 100.0, 1), StabilityError);
  HawkesSimulationOptions o;
  o.allow_nonstationary = true;
  o.max_events = 1000000;
  EXPECT_NO_THROW(simulate_hawkes(bad, 50.0, 1, o));
}

TEST(HawkesSim, DeterministicPerSeed) {
  const auto s = mutual_excitation_spec(0.015, 0.023, 0.11);
  const auto a = simulate_hawkes(s, 10000.0, 5);
  const auto b = simulate_hawkes(s, 10000.0, 5);
  EXPECT_EQ(a[0].times, b[0].times);
  EXPECT_EQ(a[1].times, b[1].times);
}

TEST(HawkesPrice, SilentModelStaysAtStart) {
  HawkesPriceParams p;
  p.mu = 0.0;
  p.x0 = {3.0, -2.0};
  const auto r = hawkes_price_model(p, 1000.0, 1);
  for (const auto& v : r.path.values) {
    EXPECT_EQ(v[0], 3.0);
    EXPECT_EQ(v[1], -2.0);
  }
}

TEST(HawkesPrice, IntegerValuedAndMatchesCounters) {
  HawkesPriceParams p;
  p.x0 = {0.5, 0.25};
  const auto r = hawkes_price_model(p, 5000.0, 9);
  ASSERT_EQ(r.path.size(), 5001u);
  for (std::size_t k = 0; k < r.path.size(); k += 97) {
    const double t = static_cast<double>(k);
    long long n[4];
    for (int c = 0; c < 4; ++c)
      n[c] = std::count_if(r.counters[c].times.begin(), r.counters[c].times.end(),
                           [t](double s) { return s <= t; });
    EXPECT_EQ(r.path.values[k][0], 0.5 + static_cast<double>(n[0] - n[1]));
    EXPECT_EQ(r.path.values[k][1], 0.25 + static_cast<double>(n[2] - n[3]));
    EXPECT_EQ(r.path.values[k][0] - 0.5, std::round(r.path.values[k][0] - 0.5));
  }
}

TEST(HawkesPrice, MonteCarloCorrelationAtThousandSeconds) {
  std::vector<double> rhos;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto r = hawkes_price_model(kDefault, 72000.0, derive_seed(11, s));
    rhos.push_back(testutil::pearson(grid_increments(r.path, 0, 1000), grid_increments(r.path, 1, 1000)));
  }
  const auto band = ribbon(rhos, 0.95);
  EXPECT_LE(std::abs(band.mean - 0.658775), band.half_width);
  EXPECT_LE(std::abs(theoretical_hawkes_correlation(kDefault, 1000.0) - band.mean), band.half_width);
}

TEST(HawkesPrice, MonteCarloAgreesWithClosedFormAcrossGrid) {
  const std::vector<std::size_t> grid{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  std::vector<std::vector<double>> rhos(grid.size());
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto r = hawkes_price_model(kDefault, 72000.0, derive_seed(12, s));
    for (std::size_t g = 0; g < grid.size(); ++g)
      rhos[g].push_back(testutil::pearson(grid_increments(r.path, 0, grid[g]),
                                          grid_increments(r.path, 1, grid[g])));
  }
  int inside = 0, inside_printed = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto band = ribbon(rhos[g], 0.95);
    const auto dt = static_cast<double>(grid[g]);
    if (std::abs(theoretical_hawkes_correlation(kDefault, dt) - band.mean) <= band.half_width) ++inside;
    if (std::abs(theoretical_hawkes_correlation(kDefault, dt, HawkesCovarianceForm::as_printed) -
                 band.mean) <= band.half_width)
      ++inside_printed;
  }
  EXPECT_GE(inside, 9); // >= 90% of grid points
  // the printed coefficient leaves the ribbon at short horizons
  EXPECT_LT(inside_printed, 9);
}

TEST(ClosedForm, LambdaAuxiliary) {
  const auto k = hawkes_covariance_terms(kDefault);
  EXPECT_NEAR(k.Lambda, 0.015 / (1.0 - 0.023 / 0.11 - 0.05 / 0.11), 1e-15);
  EXPECT_NEAR(k.Lambda, 0.044595, 1e-6);
}

TEST(ClosedForm, LimitAndSmallDt) {
  const double limit = limiting_correlation(kDefault.gamma12(), kDefault.gamma13());
  // plug-in arithmetic with the exact ratios 23/110 and 50/110
  const double g12 = 0.023 / 0.11, g13 = 0.05 / 0.11;
  EXPECT_NEAR(limit, 2 * g13 * (1 + g12) / (1 + g13 * g13 + 2 * g12 + g12 * g12), 1e-15);
  EXPECT_NEAR(limit, 0.658775, 1e-6);
  EXPECT_NEAR(theoretical_hawkes_correlation(kDefault, 1e6), limit, 1e-3);
  EXPECT_LT(std::abs(theoretical_hawkes_correlation(kDefault, 1e-3)), 1e-2);
  // shrinking dt drives the correlation to zero
  double prev = 1.0;
  for (double dt : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const double r = std::abs(theoretical_hawkes_correlation(kDefault, dt));
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(ClosedForm, VarianceTendsToPoissonRateAtSmallDt) {
  // X^1 jumps at rate 2 Lambda; the closed form carries half of that
  const auto k = hawkes_covariance_terms(kDefault);
  const auto c = theoretical_hawkes_covariance(kDefault, 1e-6);
  EXPECT_NEAR(c.c11 / 1e-6, k.Lambda, 1e-7);
}

TEST(ClosedForm, EigenmodeOracle) {
  // Independent derivation. The kernel matrix K is symmetric, so with equal
  // stationary rates Lambda the Bartlett spectrum of N splits over the
  // orthonormal eigenvectors of K. A mode with eigenvalue e has spectrum
  //   Lambda (beta^2 + w^2) / (beta^2 (1 - e)^2 + w^2),
  // i.e. a Poisson atom plus the covariance density
  //   Lambda beta e (2 - e) / (2 (1 - e)) exp(-beta (1 - e) |u|).
  // X^1 = Y_b + Y_d and X^2 = Y_d - Y_b with b = (1,-1,-1,1)/2 (e = -(g12 + g13))
  // and d = (1,-1,1,-1)/2 (e = g13 - g12). The closed form is normalised to
  // half of these covariances, which leaves the ratio unchanged.
  const double b = kDefault.beta;
  const double g12 = kDefault.gamma12(), g13 = kDefault.gamma13();
  const double lambda = hawkes_covariance_terms(kDefault).Lambda;
  auto mode_var = [&](double e, double dt) {
    const double k = b * (1.0 - e);
    const double amp = lambda * b * e * (2.0 - e) / (2.0 * (1.0 - e));
    // integral_0^dt (dt - u) exp(-k u) du
    const double integral = dt / k + std::expm1(-k * dt) / (k * k);
    return lambda * dt + 2.0 * amp * integral;
  };
  for (double dt : {0.5, 1.0, 5.0, 30.0, 200.0, 5000.0}) {
    const double vb = mode_var(-(g12 + g13), dt), vd = mode_var(g13 - g12, dt);
    const auto c = theoretical_hawkes_covariance(kDefault, dt);
    EXPECT_NEAR(c.c11, 0.5 * (vb + vd), 1e-9 * std::max(1.0, vb + vd)) << "dt = " << dt;
    EXPECT_NEAR(c.c12, 0.5 * (vd - vb), 1e-9 * std::max(1.0, std::abs(vd - vb))) << "dt = " << dt;
  }
}

TEST(ClosedForm, UncoupledModelHasZeroCorrelation) {
  HawkesPriceParams p;
  p.alpha_c = 0.0;
  for (double dt : {0.1, 1.0, 10.0, 100.0, 1e4}) EXPECT_LT(std::abs(theoretical_hawkes_correlation(p, dt)), 1e-10);
  // Monte Carlo on the uncoupled model
  const auto r = hawkes_price_model(p, 72000.0, 4);
  EXPECT_NEAR(testutil::pearson(grid_increments(r.path, 0, 10), grid_increments(r.path, 1, 10)), 0.0, 0.06);
}

TEST(ClosedForm, MonotoneAndBoundedByLimit) {
  const double limit = limiting_correlation(kDefault.gamma12(), kDefault.gamma13());
  double prev = -1.0;
  for (double dt = 1.0; dt <= 1e4; dt *= 1.05) {
    const double r = theoretical_hawkes_correlation(kDefault, dt);
    EXPECT_GT(r, prev);
    EXPECT_LE(r, limit + 1e-9);
    prev = r;
  }
}

TEST(ClosedForm, DomainErrors) {
  HawkesPriceParams p;
  EXPECT_THROW(theoretical_hawkes_covariance(p, 0.0), DomainError);
  EXPECT_THROW(theoretical_hawkes_covariance(p, -1.0), DomainError);
  EXPECT_THROW(limiting_correlation(-1.0, 0.0), DomainError);
  EXPECT_DOUBLE_EQ(limiting_correlation(0.2, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(limiting_correlation(0.0, 1.0), 1.0);
}
