#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "epps/error.hpp"
#include "epps/random.hpp"
#include "epps/types.hpp"

namespace epps {

//===========================================================================//
// Specification                                                             //
//===========================================================================//

/// M-variate Hawkes process with exponential kernels
///   phi^{mn}(t) = alpha(m, n) * exp(-beta(m, n) * t),  t > 0.
/// alpha(m, n) is the jump in the intensity of component m caused by an
/// event of component n.
struct HawkesSpec {
  Eigen::VectorXd lambda0;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd beta;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lambda0.size()); }

  void validate() const {
    const auto m = lambda0.size();
    if (m == 0) throw ParameterError("hawkes spec has no components");
    if (alpha.rows() != m || alpha.cols() != m || beta.rows() != m || beta.cols() != m)
      throw ParameterError("hawkes alpha/beta must be " + std::to_string(m) + "x" +
                           std::to_string(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(lambda0(i) >= 0.0) || !std::isfinite(lambda0(i)))
        throw ParameterError("hawkes lambda0[" + std::to_string(i) + "] must be >= 0");
      for (Eigen::Index j = 0; j < m; ++j) {
        const std::string at = "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        if (!(alpha(i, j) >= 0.0) || !std::isfinite(alpha(i, j)))
          throw ParameterError("hawkes alpha" + at + " must be >= 0");
        if (alpha(i, j) > 0.0 && !(beta(i, j) > 0.0 && std::isfinite(beta(i, j))))
          throw ParameterError("hawkes beta" + at + " must be > 0 where alpha > 0");
      }
    }
  }
};

/// Two-component mutually exciting sampler: zero diagonal, alpha and beta
/// shared by both cross links.
inline HawkesSpec mutual_excitation_spec(double baseline, double alpha, double beta) {
  HawkesSpec s;
  s.lambda0 = Eigen::Vector2d(baseline, baseline);
  s.alpha = Eigen::Matrix2d{{0.0, alpha}, {alpha, 0.0}};
  s.beta = Eigen::Matrix2d::Constant(beta);
  return s;
}

//===========================================================================//
// Branching ratios and stability                                            //
//===========================================================================//

/// Matrix of kernel L1 norms, alpha / beta elementwise.
struct BranchingMatrix {
  Eigen::MatrixXd gamma;
};

inline BranchingMatrix branching_matrix(const HawkesSpec& spec) {
  spec.validate();
  BranchingMatrix b;
  b.gamma = Eigen::MatrixXd::Zero(spec.alpha.rows(), spec.alpha.cols());
  for (Eigen::Index i = 0; i < spec.alpha.rows(); ++i)
    for (Eigen::Index j = 0; j < spec.alpha.cols(); ++j)
      if (spec.alpha(i, j) > 0.0) b.gamma(i, j) = spec.alpha(i, j) / spec.beta(i, j);
  return b;
}

enum class Stability { stationary, quasi_stationary, non_stationary };

inline const char* to_string(Stability s) {
  switch (s) {
  case Stability::stationary: return "stationary";
  case Stability::quasi_stationary: return "quasi_stationary";
  case Stability::non_stationary: return "non_stationary";
  }
  return "?";
}

struct StabilityReport {
  Stability classification = Stability::stationary;
  double spectral_radius = 0.0;
};

/// |rho(Gamma) - 1| below this counts as the critical (quasi-stationary) case.
inline constexpr double kCriticalTolerance = 1e-9;

inline StabilityReport classify_stability(const BranchingMatrix& b) {
  const auto& g = b.gamma;
  if (g.rows() != g.cols()) throw ParameterError("branching matrix must be square");
  StabilityReport r;
  if (g.size() == 0) return r;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(g, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigenvalue iteration did not converge for branching matrix");
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    r.spectral_radius = std::max(r.spectral_radius, std::abs(solver.eigenvalues()(i)));
  if (std::abs(r.spectral_radius - 1.0) < kCriticalTolerance)
    r.classification = Stability::quasi_stationary;
  else if (r.spectral_radius < 1.0)
    r.classification = Stability::stationary;
  else
    r.classification = Stability::non_stationary;
  return r;
}

/// Long-run event rates (I - Gamma)^{-1} lambda0 of a stationary process.
inline Eigen::VectorXd stationary_rates(const HawkesSpec& spec) {
  const auto b = branching_matrix(spec);
  const auto m = b.gamma.rows();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - b.gamma;
  return a.fullPivLu().solve(spec.lambda0);
}

//===========================================================================//
// Intensity                                                                 //
//===========================================================================//

/// Markov state of the exponential kernels.
///
/// excitation(m, n) holds sum_{s in N^n, s < t} alpha(m, n) exp(-beta(m, n) (t - s))
/// for the current time t. Advancing time decays every entry; an event of
/// component n adds alpha(., n) to column n.
class HawkesIntensityState {
public:
  explicit HawkesIntensityState(const HawkesSpec& spec)
      : spec_(&spec), excitation_(Eigen::MatrixXd::Zero(spec.alpha.rows(), spec.alpha.cols())) {}

  double time() const noexcept { return time_; }

  void advance_to(double t) {
    const double dt = t - time_;
    if (dt > 0.0) {
      const auto m = excitation_.rows();
      for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i)
          if (excitation_(i, j) != 0.0) excitation_(i, j) *= std::exp(-spec_->beta(i, j) * dt);
    }
    time_ = t;
  }

  /// Registers an event of component n at the current time.
  void add_event(std::size_t n) {
    const auto col = static_cast<Eigen::Index>(n);
    for (Eigen::Index i = 0; i < excitation_.rows(); ++i) excitation_(i, col) += spec_->alpha(i, col);
  }

  double intensity(std::size_t m) const {
    const auto row = static_cast<Eigen::Index>(m);
    return spec_->lambda0(row) + excitation_.row(row).sum();
  }

  Eigen::VectorXd intensities() const {
    return spec_->lambda0 + excitation_.rowwise().sum();
  }

  double total_intensity() const { return spec_->lambda0.sum() + excitation_.sum(); }

private:
  const HawkesSpec* spec_;
  Eigen::MatrixXd excitation_;
  double time_ = 0.0;
};

/// Conditional intensity at time t given the event history. Events at or
/// after t are ignored (the kernels are causal).
inline Eigen::VectorXd intensity_at(const HawkesSpec& spec, const std::vector<ArrivalSet>& history,
                                    double t) {
  spec.validate();
  if (history.size() != spec.dim())
    throw ParameterError("history has " + std::to_string(history.size()) +
                         " components, spec has " + std::to_string(spec.dim()));
  // Merge the components in time order; ties are order-free for the state.
  std::vector<std::pair<double, std::size_t>> events;
  for (std::size_t n = 0; n < history.size(); ++n)
    for (double s : history[n].times)
      if (s < t) events.emplace_back(s, n);
  std::sort(events.begin(), events.end());

  HawkesIntensityState state(spec);
  for (const auto& [s, n] : events) {
    state.advance_to(s);
    state.add_event(n);
  }
  state.advance_to(t);
  return state.intensities();
}

//===========================================================================//
// Simulation                                                                //
//===========================================================================//

struct HawkesSimulationOptions {
  /// Permit non-stationary specs (testing only; runs may explode).
  bool allow_nonstationary = false;
  /// Hard cap on accepted events across all components.
  std::size_t max_events = 50'000'000;
};

/// Thinning simulation on [0, horizon].
///
/// Between events the total intensity I(t) is non-increasing, so I at the
/// current time bounds it until the next event. Each round draws a candidate
/// tau ~ Exp(I(t)) and u ~ U[0, I(t)]; the candidate t + tau is accepted iff
/// u <= I(t + tau) and attributed to the component i with
/// I^{i-1}(t + tau) < u <= I^i(t + tau), where I^i is the cumulative
/// intensity over components 1..i. The kernel state decays to every
/// candidate whether or not it is accepted.
inline std::vector<ArrivalSet> simulate_hawkes(const HawkesSpec& spec, double horizon,
                                               std::uint64_t seed,
                                               const HawkesSimulationOptions& options = {}) {
  spec.validate();
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw ParameterError("hawkes horizon must be >= 0");
  const auto stability = classify_stability(branching_matrix(spec));
  if (stability.classification != Stability::stationary && !options.allow_nonstationary)
    throw StabilityError(std::string("hawkes spec is ") + to_string(stability.classification) +
                             " (spectral radius " + std::to_string(stability.spectral_radius) + ")",
                         stability.spectral_radius);

  const std::size_t m = spec.dim();
  std::vector<ArrivalSet> out(m);
  for (auto& a : out) a.horizon = horizon;

  Rng rng(seed, 0);
  HawkesIntensityState state(spec);
  std::vector<double> cumulative(m);
  std::size_t accepted = 0;
  double t = 0.0;

  while (true) {
    const double bound = state.total_intensity();
    if (!(bound > 0.0)) break;
    const double candidate = t + rng.exponential(bound);
    const double u = bound * rng.uniform();
    if (candidate > horizon) break;
    if (!(candidate > t)) continue; // tau below the resolution of t
    state.advance_to(candidate);
    t = candidate;

    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      total += state.intensity(i);
      cumulative[i] = total;
    }
    if (u > total) continue; // rejected

    std::size_t component = m - 1;
    for (std::size_t i = 0; i < m; ++i)
      if (u <= cumulative[i]) {
        component = i;
        break;
      }
    out[component].times.push_back(t);
    state.add_event(component);
    if (++accepted > options.max_events)
      throw NumericError("hawkes simulation exceeded " + std::to_string(options.max_events) +
                         " events");
  }
  return out;
}

//===========================================================================//
// Hawkes price model                                                        //
//===========================================================================//

/// Four-counter price model: X^1 = X0^1 + N1 - N2, X^2 = X0^2 + N3 - N4.
/// alpha_r links up- and down-ticks of the same asset (reversion),
/// alpha_c links same-direction ticks across assets. All kernels share beta.
struct HawkesPriceParams {
  double mu = 0.015;
  double alpha_r = 0.023;
  double alpha_c = 0.05;
  double beta = 0.11;
  std::array<double, 2> x0{0.0, 0.0};

  double gamma12() const { return alpha_r / beta; }
  double gamma13() const { return alpha_c / beta; }

  void validate() const {
    if (!(mu >= 0.0) || !(alpha_r >= 0.0) || !(alpha_c >= 0.0))
      throw ParameterError("hawkes price rates must be >= 0");
    if (!(beta > 0.0)) throw ParameterError("hawkes price beta must be > 0");
    if (!(gamma12() + gamma13() < 1.0))
      throw ParameterError("hawkes price model is not stationary (Gamma12 + Gamma13 >= 1)");
    for (double x : x0)
      if (!std::isfinite(x)) throw ParameterError("hawkes price x0 must be finite");
  }

  HawkesSpec spec() const {
    HawkesSpec s;
    s.lambda0 = Eigen::Vector4d::Constant(mu);
    const double r = alpha_r, c = alpha_c;
    s.alpha = Eigen::Matrix4d{{0, r, c, 0}, {r, 0, 0, c}, {c, 0, 0, r}, {0, c, r, 0}};
    s.beta = Eigen::Matrix4d::Constant(beta);
    return s;
  }
};

struct HawkesPricePath {
  PricePath path;                  ///< counts sampled at every whole second
  std::vector<ArrivalSet> counters; ///< N1..N4 event times
};

/// Simulates the counters and records the price at t = 0, 1, ..., floor(T).
/// The grid value at k includes events at exactly t = k.
inline HawkesPricePath hawkes_price_model(const HawkesPriceParams& params, double horizon,
                                          std::uint64_t seed) {
  params.validate();
  HawkesPricePath out;
  out.counters = simulate_hawkes(params.spec(), horizon, seed);

  const auto last = static_cast<std::size_t>(std::floor(horizon));
  out.path.t0 = 0.0;
  out.path.dt = 1.0;
  out.path.values.resize(last + 1);
  std::array<std::size_t, 4> cursor{};
  std::array<long long, 4> count{};
  for (std::size_t k = 0; k <= last; ++k) {
    const auto t = static_cast<double>(k);
    for (std::size_t c = 0; c < 4; ++c) {
      const auto& times = out.counters[c].times;
      while (cursor[c] < times.size() && times[cursor[c]] <= t) {
        ++cursor[c];
        ++count[c];
      }
    }
    out.path.values[k][0] = params.x0[0] + static_cast<double>(count[0] - count[1]);
    out.path.values[k][1] = params.x0[1] + static_cast<double>(count[2] - count[3]);
  }
  return out;
}

//===========================================================================//
// Closed-form covariance of the price model                                 //
//===========================================================================//

/// Auxiliary constants of the closed-form covariance.
struct HawkesCovarianceTerms {
  double gamma12, gamma13;
  double Lambda, R, C1, C2, Q1, Q2, G1, G2;
};

inline HawkesCovarianceTerms hawkes_covariance_terms(const HawkesPriceParams& p) {
  const double g12 = p.gamma12();
  const double g13 = p.gamma13();
  const double one_minus = 1.0 - g12 - g13;
  if (!(one_minus > 0.0))
    throw DomainError("closed-form covariance needs Gamma12 + Gamma13 < 1");
  if (1.0 + g12 - g13 == 0.0)
    throw DomainError("closed-form covariance undefined at 1 + Gamma12 - Gamma13 = 0");
  HawkesCovarianceTerms t{};
  t.gamma12 = g12;
  t.gamma13 = g13;
  t.Lambda = p.mu / one_minus;
  t.R = p.beta * p.mu / (g12 + g13 - 1.0);
  t.C1 = (2.0 + g12 + g13) * (g12 + g13) / (1.0 + g12 + g13);
  t.C2 = (2.0 + g12 - g13) * (g12 - g13) / (1.0 + g12 - g13);
  const double q_den = ((g12 + 1.0) * (g12 + 1.0) - g13 * g13) * one_minus;
  t.Q1 = -p.mu * (g12 * g12 + g12 - g13 * g13) / q_den;
  t.Q2 = -p.mu * g13 / q_den;
  t.G1 = p.beta * (1.0 + g12 + g13);
  t.G2 = p.beta * (1.0 + g12 - g13);
  return t;
}

/// Which coefficient multiplies exp(-dt G1) in C11.
///
/// as_printed uses Q1 as in the published system. That form makes C11 / dt
/// blow up like 1 / dt as dt -> 0, whereas the variance of a counting
/// difference must tend to its Poisson limit. consistent uses C1 in that
/// slot, which matches an eigenmode derivation of the same covariance and
/// the Monte Carlo of the price model (see tests).
enum class HawkesCovarianceForm { consistent, as_printed };

/// The closed form is normalised to half the covariance of the counting
/// differences over dt (C11 / dt -> Lambda, while X^1 jumps at rate
/// 2 Lambda). The correlation C12 / C11 does not depend on that factor.
struct HawkesCovariance {
  double c11 = 0.0;
  double c12 = 0.0;
};

inline HawkesCovariance theoretical_hawkes_covariance(
    const HawkesPriceParams& params, double dt,
    HawkesCovarianceForm form = HawkesCovarianceForm::consistent) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("closed-form covariance needs dt > 0");
  const auto k = hawkes_covariance_terms(params);
  const double G1sq = k.G1 * k.G1, G2sq = k.G2 * k.G2;
  const double den = 2.0 * G1sq * G2sq * dt;
  const double em1_g1 = std::expm1(-dt * k.G1); // e^{-dt G1} - 1
  const double em1_g2 = std::expm1(-dt * k.G2);

  // C2 G1^2 e^{-dt G2} - C2 G1^2
  const double c2_part = k.C2 * G1sq * em1_g2;
  // -C1 G2^2 + (Q1 | C1) G2^2 e^{-dt G1}
  const double c1_part = form == HawkesCovarianceForm::consistent
                             ? k.C1 * G2sq * em1_g1
                             : -k.C1 * G2sq + k.Q1 * G2sq * std::exp(-dt * k.G1);

  const double c11_rate = k.Lambda + k.R * k.C1 / (2.0 * k.G1) + k.R * k.C2 / (2.0 * k.G2) +
                          k.R * (c2_part + c1_part) / den;
  // C1 G2^2 - C2 G1^2 - C1 G2^2 e^{-G1 dt} + C2 G1^2 e^{-G2 dt}
  const double c12_num = -k.C1 * G2sq * em1_g1 + k.C2 * G1sq * em1_g2;
  const double c12_rate =
      -k.R * k.C1 / (2.0 * k.G1) + k.R * k.C2 / (2.0 * k.G2) + k.R * c12_num / den;
  return {c11_rate * dt, c12_rate * dt};
}

/// rho(dt) = C12 / C11 (C11 = C22 for the symmetric layout).
inline double theoretical_hawkes_correlation(
    const HawkesPriceParams& params, double dt,
    HawkesCovarianceForm form = HawkesCovarianceForm::consistent) {
  const auto c = theoretical_hawkes_covariance(params, dt, form);
  if (c.c11 == 0.0) throw DomainError("closed-form variance is zero");
  return c.c12 / c.c11;
}

/// dt -> infinity limit of the price-model correlation.
inline double limiting_correlation(double gamma12, double gamma13) {
  const double den = 1.0 + gamma13 * gamma13 + 2.0 * gamma12 + gamma12 * gamma12;
  if (!(den > 0.0)) throw DomainError("limiting correlation denominator must be > 0");
  return 2.0 * gamma13 * (1.0 + gamma12) / den;
}

} // namespace epps
