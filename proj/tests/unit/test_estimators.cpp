#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "epps/estimators.hpp"
#include "epps/sampling.hpp"
#include "epps/stats.hpp"
#include "epps/stochastic_paths.hpp"
#include "test_util.hpp"

using namespace epps;

namespace {

GridSeries grid(std::vector<double> v, double dt = 1.0) {
  GridSeries g;
  g.dt = dt;
  g.values = std::move(v);
  return g;
}

/// Hayashi-Yoshida by the O(n m) double loop over half-open intervals.
double brute_hy(const TickSeries& a, const TickSeries& b) {
  double s = 0;
  for (std::size_t l = 1; l < a.size(); ++l)
    for (std::size_t k = 1; k < b.size(); ++k) {
      const double lo = std::max(a.arrivals.times[l - 1], b.arrivals.times[k - 1]);
      const double hi = std::min(a.arrivals.times[l], b.arrivals.times[k]);
      if (lo < hi) s += (a.values[l] - a.values[l - 1]) * (b.values[k] - b.values[k - 1]);
    }
  return s;
}

double naive_rc(const GridSeries& a, const GridSeries& b) {
  double s = 0;
  for (std::size_t h = 1; h < a.size(); ++h) s += (a.values[h] - a.values[h - 1]) * (b.values[h] - b.values[h - 1]);
  return s;
}

std::vector<double> random_walk(Rng& rng, std::size_t n) {
  std::vector<double> v{0.0};
  for (std::size_t i = 0; i < n; ++i) v.push_back(v.back() + rng.normal());
  return v;
}

} // namespace

TEST(RealisedCovariance, ConstantIncrements) {
  const double r = 3.0;
  const std::size_t n = 12;
  std::vector<double> v;
  for (std::size_t k = 0; k <= n; ++k) v.push_back(r * static_cast<double>(k) / static_cast<double>(n));
  EXPECT_NEAR(realised_covariance(grid(v), grid(v)), r * r / static_cast<double>(n), 1e-15);
  EXPECT_EQ(realised_covariance(grid(v), grid(std::vector<double>(n + 1, 2.0))), 0.0);
  EXPECT_THROW(realised_covariance(grid(v), grid({1, 2})), ShapeError);
  EXPECT_THROW(realised_covariance(grid(v, 1.0), grid(v, 2.0)), ShapeError);
}

TEST(RealisedCovariance, MatchesNaiveLoop) {
  Rng rng(1, 0);
  for (int t = 0; t < 200; ++t) {
    const auto a = grid(random_walk(rng, 500)), b = grid(random_walk(rng, 500));
    EXPECT_NEAR(realised_covariance(a, b), naive_rc(a, b), 1e-12 * std::max(1.0, std::abs(naive_rc(a, b))));
  }
}

TEST(Measured, SignAndDegeneracy) {
  Rng rng(2, 0);
  const auto v = random_walk(rng, 100);
  std::vector<double> neg;
  for (double x : v) neg.push_back(-x);
  EXPECT_NEAR(measured_correlation(grid(v), grid(v)).rho, 1.0, 1e-15);
  EXPECT_NEAR(measured_correlation(grid(v), grid(neg)).rho, -1.0, 1e-15);
  try {
    measured_correlation(grid(v), grid(std::vector<double>(v.size(), 1.0)));
    FAIL() << "expected DegenerateVarianceError";
  } catch (const DegenerateVarianceError& e) {
    EXPECT_EQ(e.leg, 1);
  }
}

TEST(HayashiYoshida, SweepMatchesDoubleLoop) {
  Rng rng(3, 0);
  for (int t = 0; t < 200; ++t) {
    const auto n = 2 + static_cast<std::size_t>(rng.uniform() * 1000);
    const auto m = 2 + static_cast<std::size_t>(rng.uniform() * 1000);
    const auto a = testutil::random_ticks(rng, n, 1000.0);
    const auto b = testutil::random_ticks(rng, m, 1000.0);
    const double ref = brute_hy(a, b);
    EXPECT_NEAR(hayashi_yoshida_covariance(a, b), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(HayashiYoshida, SharedEndpointIsNotOverlap) {
  TickSeries a{{{0.0, 1.0}, 2.0}, {0.0, 1.0}};
  TickSeries b{{{1.0, 2.0}, 2.0}, {0.0, 1.0}};
  EXPECT_EQ(hayashi_yoshida_covariance(a, b), 0.0);
}

TEST(HayashiYoshida, IdentityAndSynchronousEquality) {
  Rng rng(4, 0);
  const auto s = testutil::random_ticks(rng, 300, 100.0);
  EXPECT_NEAR(hayashi_yoshida(s, s).rho, 1.0, 1e-14);
  // synchronous ticks every 5 s: HY = measured at dt = 5
  TickSeries a, b;
  const auto va = random_walk(rng, 400), vb = random_walk(rng, 400);
  for (std::size_t k = 0; k <= 400; ++k) {
    a.arrivals.times.push_back(5.0 * static_cast<double>(k));
    b.arrivals.times.push_back(5.0 * static_cast<double>(k));
  }
  a.arrivals.horizon = b.arrivals.horizon = 2000.0;
  a.values = va;
  b.values = vb;
  const auto m = measured_correlation(previous_tick_grid(a, 5.0, 2000.0), previous_tick_grid(b, 5.0, 2000.0));
  EXPECT_NEAR(hayashi_yoshida(a, b).rho, m.rho, 1e-12);
}

TEST(HayashiYoshida, Errors) {
  TickSeries one{{{1.0}, 2.0}, {1.0}};
  TickSeries two{{{1.0, 2.0}, 2.0}, {1.0, 1.0}};
  EXPECT_THROW(hayashi_yoshida(one, two), InsufficientDataError);
  TickSeries moving{{{1.0, 2.0}, 2.0}, {1.0, 2.0}};
  EXPECT_THROW(hayashi_yoshida(moving, two), DegenerateVarianceError);
}

TEST(Overlap, EveryGridPointGivesDt) {
  ArrivalSet u{{}, 1000.0};
  for (int k = 0; k <= 1000; ++k) u.times.push_back(k);
  for (double dt : {1.0, 5.0, 20.0}) {
    const auto s = overlap_expectation(u, u, dt, 1000.0);
    EXPECT_NEAR(s.kappa_ii, dt, 1e-12);
    EXPECT_NEAR(s.kappa_ij, dt, 1e-12);
    EXPECT_NEAR(overlap_correction(0.4, s).rho, 0.4, 1e-12);
  }
}

TEST(Overlap, DisjointSparseArrivals) {
  ArrivalSet ui{{}, 10000.0}, uj{{}, 10000.0};
  for (int k = 0; k < 50; ++k) {
    ui.times.push_back(200.0 * k);
    uj.times.push_back(200.0 * k + 100.0);
  }
  const auto s = overlap_expectation(ui, uj, 1.0, 10000.0);
  EXPECT_LT(s.kappa_ij, 0.01 * s.kappa_ii);
  EXPECT_GT(s.kappa_ii, 0.0);
  EXPECT_THROW(overlap_correction(0.5, OverlapStats{1.0, 1.0, 0.0, 1}), NoOverlapError);
  EXPECT_THROW(overlap_expectation(ArrivalSet{}, uj, 1.0, 10.0), EmptyInputError);
}

TEST(Overlap, PoissonRatioMatchesAnalyticFactor) {
  const double rate = 1.0 / 15.0;
  for (double dt : {5.0, 15.0, 50.0}) {
    std::vector<double> ratios;
    for (std::uint64_t r = 0; r < 40; ++r) {
      const auto ui = poisson_arrivals(rate, 72000.0, derive_seed(r, 1));
      const auto uj = poisson_arrivals(rate, 72000.0, derive_seed(r, 2));
      const auto s = overlap_expectation(ui, uj, dt, 72000.0);
      EXPECT_LE(s.kappa_ij, std::min(s.kappa_ii, s.kappa_jj) + 1e-9);
      ratios.push_back(s.kappa_ij / std::sqrt(s.kappa_ii * s.kappa_jj));
    }
    const auto band = ribbon(ratios, 0.95);
    const double analytic = 1.0 + std::expm1(-rate * dt) / (rate * dt);
    EXPECT_LE(std::abs(band.mean - analytic), band.half_width) << "dt = " << dt;
  }
}

TEST(Overlap, RoundTripAtUnitLambdaDt) {
  const double f = std::exp(-1.0);
  OverlapStats s{1.0, 1.0, f, 1};
  EXPECT_NEAR(overlap_correction(0.65 * f, s).rho, 0.65, 1e-12);
  EXPECT_NEAR(overlap_correction(-0.3, s).rho, -0.3 / f, 1e-12); // sign kept, may exceed 1 in size
}

TEST(FlatTrade, Probability) {
  EXPECT_EQ(flat_trade_probability(grid({0, 1, 3, 4})), 0.0);
  EXPECT_EQ(flat_trade_probability(grid({2, 2, 2})), 1.0);
  EXPECT_EQ(flat_trade_probability(grid({0, 1, 1, 2, 2})), 0.5);
  EXPECT_THROW(flat_trade_probability(grid({1})), InsufficientDataError);
}

TEST(FlatTrade, Correction) {
  EXPECT_EQ(flat_trade_correction(0.4, 0.0, 0.0).rho, 0.4);
  EXPECT_NEAR(flat_trade_correction(0.1, 0.5, 0.5).rho, 0.3, 1e-15);
  EXPECT_THROW(flat_trade_correction(0.1, 1.0, 0.2), SaturationError);
  for (double pi = 0.0; pi < 1.0; pi += 0.1)
    for (double pj = 0.0; pj < 1.0; pj += 0.1) {
      const double factor = flat_trade_correction(1.0, pi, pj).rho;
      EXPECT_GE(factor, 1.0);
      if (pi > 0 || pj > 0) {
        EXPECT_GT(factor, 1.0);
      }
      EXPECT_LT(flat_trade_correction(-0.2, pi, pj).rho, 0.0);
    }
}

TEST(PoissonEpps, Values) {
  EXPECT_NEAR(theoretical_poisson_epps(0.65, 1.0 / 15.0, 15.0), 0.65 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(theoretical_poisson_epps(0.65, 1.0, 1.0), 0.23913, 1e-5);
  EXPECT_NEAR(theoretical_poisson_epps(0.65, 0.1, 1e7), 0.65, 1e-6);
  const double small = theoretical_poisson_epps(0.65, 1.0, 1e-6);
  EXPECT_NEAR(small, 0.65 * 1e-6 / 2.0, 1e-12 * 0.65 / 6.0 + 1e-18);
  EXPECT_THROW(theoretical_poisson_epps(0.65, 0.0, 1.0), DomainError);
}

TEST(Measured, MonteCarloMatchesPoissonCurveAtUnitLambdaDt) {
  GbmParams gp;
  const double rate = 1.0 / 15.0;
  std::vector<double> rhos;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto path = simulate_gbm(gp, derive_seed(7, r));
    const auto si = observe_path(path, 0, poisson_arrivals(rate, 72000.0, derive_seed(r, 11)));
    const auto sj = observe_path(path, 1, poisson_arrivals(rate, 72000.0, derive_seed(r, 12)));
    rhos.push_back(measured_correlation(previous_tick_grid(si, 15.0, 72000.0),
                                        previous_tick_grid(sj, 15.0, 72000.0)).rho);
  }
  const auto band = ribbon(rhos, 0.95);
  EXPECT_LE(std::abs(band.mean - 0.2391), band.half_width);
}

TEST(Overlap, CorrectedCurveIsFlatWhileMeasuredRises) {
  GbmParams gp;
  const double rate = 1.0 / 15.0;
  const std::vector<double> dts{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  auto slope = [&](const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      mx += dts[i];
      my += y[i];
    }
    mx /= static_cast<double>(y.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      sxy += (dts[i] - mx) * (y[i] - my);
      sxx += (dts[i] - mx) * (dts[i] - mx);
    }
    return sxy / sxx;
  };
  std::vector<double> corrected_slopes, raw_slopes;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto path = simulate_gbm(gp, derive_seed(8, r));
    const auto ui = poisson_arrivals(rate, 72000.0, derive_seed(r, 21));
    const auto uj = poisson_arrivals(rate, 72000.0, derive_seed(r, 22));
    const auto si = observe_path(path, 0, ui), sj = observe_path(path, 1, uj);
    std::vector<double> raw, corr;
    for (double dt : dts) {
      const double m = measured_correlation(previous_tick_grid(si, dt, 72000.0),
                                            previous_tick_grid(sj, dt, 72000.0)).rho;
      raw.push_back(m);
      corr.push_back(overlap_correction(m, overlap_expectation(ui, uj, dt, 72000.0)).rho);
    }
    corrected_slopes.push_back(slope(corr));
    raw_slopes.push_back(slope(raw));
  }
  // t test on the mean slope
  const double n = static_cast<double>(corrected_slopes.size());
  const double tq = student_t_multiplier(0.95, n - 1);
  const double mc = mean_of(corrected_slopes), mr = mean_of(raw_slopes);
  EXPECT_LE(std::abs(mc), tq * sample_sd(corrected_slopes, mc) / std::sqrt(n));
  EXPECT_GT(mr, tq * sample_sd(raw_slopes, mr) / std::sqrt(n));
}
