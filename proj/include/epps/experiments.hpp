#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epps/error.hpp"
#include "epps/estimators.hpp"
#include "epps/hawkes.hpp"
#include "epps/parallel.hpp"
#include "epps/random.hpp"
#include "epps/sampling.hpp"
#include "epps/stats.hpp"
#include "epps/stochastic_paths.hpp"

namespace epps {

//===========================================================================//
// Configuration                                                             //
//===========================================================================//

enum class PriceModel { gbm, merton, hawkes_price };
enum class SamplerKind { poisson, hawkes, synchronous };

/// single_path: one latent path, re-sampled per replication.
/// fresh_paths: a new latent path per replication.
enum class PathProtocol { single_path, fresh_paths };

inline const char* to_string(PriceModel m) {
  switch (m) {
  case PriceModel::gbm: return "gbm";
  case PriceModel::merton: return "merton";
  case PriceModel::hawkes_price: return "hawkes-price";
  }
  return "?";
}

inline const char* to_string(SamplerKind s) {
  switch (s) {
  case SamplerKind::poisson: return "poisson";
  case SamplerKind::hawkes: return "hawkes";
  case SamplerKind::synchronous: return "synchronous";
  }
  return "?";
}

inline const char* to_string(PathProtocol p) {
  return p == PathProtocol::single_path ? "single_path" : "fresh_paths";
}

struct SamplerConfig {
  SamplerKind kind = SamplerKind::poisson;
  double poisson_rate = 1.0 / 15.0;
  double hawkes_baseline = 0.015;
  double hawkes_alpha = 0.023;
  double hawkes_beta = 0.11;

  HawkesSpec hawkes_spec() const {
    return mutual_excitation_spec(hawkes_baseline, hawkes_alpha, hawkes_beta);
  }
};

struct ExperimentConfig {
  PriceModel model = PriceModel::gbm;
  GbmParams gbm;
  MertonParams merton;
  HawkesPriceParams hawkes_price;
  double horizon = 72000.0;

  SamplerConfig sampler;
  std::vector<double> dt_grid{1, 2, 5, 10, 15, 20, 30, 50, 75, 100};
  std::vector<double> mean_interarrivals; ///< 1/lambda axis of the rate experiments
  std::size_t k_max = 50;
  std::vector<Method> estimators{Method::measured, Method::flat_trade, Method::overlap,
                                 Method::hayashi_yoshida};

  std::size_t replications = 100;
  double confidence = 0.95;
  std::uint64_t seed = 1;
  PathProtocol protocol = PathProtocol::single_path;
  unsigned threads = 1;
  double overlap_stride = 0.0; ///< 0: evaluate overlaps on the dt grid
  bool include_theory = true;

  void validate() const {
    if (replications < 1) throw ParameterError("replications must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
      throw ParameterError("confidence must lie in (0, 1)");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");
    for (std::size_t i = 0; i < dt_grid.size(); ++i) {
      if (!(dt_grid[i] > 0.0)) throw ParameterError("dt_grid entries must be > 0");
      if (i > 0 && !(dt_grid[i] > dt_grid[i - 1]))
        throw ParameterError("dt_grid must be strictly increasing");
    }
    for (double ia : mean_interarrivals)
      if (!(ia > 0.0)) throw ParameterError("mean inter-arrivals must be > 0");
    if (overlap_stride < 0.0) throw ParameterError("overlap_stride must be >= 0");
    switch (model) {
    case PriceModel::gbm: gbm.validate(); break;
    case PriceModel::merton: merton.validate(); break;
    case PriceModel::hawkes_price: hawkes_price.validate(); break;
    }
    if (sampler.kind == SamplerKind::poisson && !(sampler.poisson_rate > 0.0))
      throw ParameterError("sampler.poisson_rate must be > 0");
    if (sampler.kind == SamplerKind::hawkes) sampler.hawkes_spec().validate();
  }
};

//===========================================================================//
// Curves                                                                    //
//===========================================================================//

struct CurvePoint {
  double axis = 0.0;
  std::string estimator;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double half_width = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_fail = 0;
};

/// Per-axis replication statistics for one or more estimators. Rows with
/// n_ok = 0 and n_fail = 0 are analytic reference curves ("theory").
struct EppsCurve {
  std::string axis_name = "dt";
  std::vector<CurvePoint> points;
  std::map<std::string, std::string> metadata;

  std::vector<CurvePoint> series(std::string_view estimator) const {
    std::vector<CurvePoint> out;
    for (const auto& p : points)
      if (p.estimator == estimator) out.push_back(p);
    std::stable_sort(out.begin(), out.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.axis < b.axis; });
    return out;
  }

  std::vector<std::string> estimators() const {
    std::vector<std::string> out;
    for (const auto& p : points)
      if (std::find(out.begin(), out.end(), p.estimator) == out.end()) out.push_back(p.estimator);
    return out;
  }

  const CurvePoint* find(std::string_view estimator, double axis) const {
    for (const auto& p : points)
      if (p.estimator == estimator && p.axis == axis) return &p;
    return nullptr;
  }
};

inline constexpr std::string_view kTheoryEstimator = "theory";

/// Aggregates replicate values (NaN marks a failed replicate).
inline CurvePoint aggregate_point(double axis, std::string estimator,
                                  const std::vector<double>& replicate_values, double confidence) {
  CurvePoint p;
  p.axis = axis;
  p.estimator = std::move(estimator);
  std::vector<double> ok;
  ok.reserve(replicate_values.size());
  for (double v : replicate_values) {
    if (std::isfinite(v))
      ok.push_back(v);
    else
      ++p.n_fail;
  }
  p.n_ok = ok.size();
  if (ok.size() >= 2) {
    const auto r = ribbon(ok, confidence);
    p.mean = r.mean;
    p.half_width = r.half_width;
  } else if (ok.size() == 1) {
    p.mean = ok.front();
    p.half_width = 0.0;
  }
  return p;
}

//===========================================================================//
// Simulation plumbing                                                       //
//===========================================================================//

namespace detail {

inline constexpr std::uint64_t kPathStream = 0;
inline constexpr std::uint64_t kSamplerStream[2] = {1, 2};
inline constexpr std::uint64_t kRateStreamBase = 16;

inline PricePath simulate_latent(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.model) {
  case PriceModel::gbm: {
    auto p = cfg.gbm;
    p.horizon = cfg.horizon;
    return simulate_gbm(p, seed);
  }
  case PriceModel::merton: {
    auto p = cfg.merton;
    p.diffusion.horizon = cfg.horizon;
    return simulate_merton(p, seed);
  }
  case PriceModel::hawkes_price:
    return hawkes_price_model(cfg.hawkes_price, cfg.horizon, seed).path;
  }
  throw ParameterError("unknown price model");
}

/// Induced (diffusion) correlation of the latent model, if it has one.
inline std::optional<double> induced_correlation(const ExperimentConfig& cfg) {
  switch (cfg.model) {
  case PriceModel::gbm: return cfg.gbm.rho;
  case PriceModel::merton: return cfg.merton.diffusion.rho;
  case PriceModel::hawkes_price: return std::nullopt;
  }
  return std::nullopt;
}

inline std::pair<TickSeries, TickSeries> sample_pair(const PricePath& path,
                                                     const SamplerConfig& sampler,
                                                     std::uint64_t seed) {
  const double horizon = path.end_time();
  switch (sampler.kind) {
  case SamplerKind::poisson: {
    const auto ui = poisson_arrivals(sampler.poisson_rate, horizon, derive_seed(seed, kSamplerStream[0]));
    const auto uj = poisson_arrivals(sampler.poisson_rate, horizon, derive_seed(seed, kSamplerStream[1]));
    return {observe_path(path, 0, ui), observe_path(path, 1, uj)};
  }
  case SamplerKind::hawkes: {
    auto [ui, uj] = hawkes_arrivals(sampler.hawkes_spec(), horizon, seed);
    return {observe_path(path, 0, ui), observe_path(path, 1, uj)};
  }
  case SamplerKind::synchronous:
    return {path.leg(0), path.leg(1)};
  }
  throw ParameterError("unknown sampler");
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

/// Estimator values for one replicate at each dt; NaN where an estimator
/// failed (degenerate variance, no overlap, saturation, empty legs).
inline std::vector<std::vector<double>> estimate_all(const TickSeries& si, const TickSeries& sj,
                                                     double horizon,
                                                     const std::vector<double>& dt_grid,
                                                     const std::vector<Method>& methods,
                                                     double overlap_stride) {
  std::vector<std::vector<double>> out(methods.size(), std::vector<double>(dt_grid.size(), nan()));
  const bool want_hy =
      std::find(methods.begin(), methods.end(), Method::hayashi_yoshida) != methods.end();
  double hy = nan();
  if (want_hy) {
    try {
      hy = hayashi_yoshida(si, sj).rho;
    } catch (const Error&) {
    }
  }
  for (std::size_t d = 0; d < dt_grid.size(); ++d) {
    const double dt = dt_grid[d];
    std::optional<CorrelationEstimate> measured;
    std::optional<GridSeries> gi, gj;
    try {
      gi = previous_tick_grid(si, dt, horizon);
      gj = previous_tick_grid(sj, dt, horizon);
      measured = measured_correlation(*gi, *gj);
    } catch (const Error&) {
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      try {
        switch (methods[m]) {
        case Method::measured:
          if (measured) out[m][d] = measured->rho;
          break;
        case Method::flat_trade:
          if (measured)
            out[m][d] = flat_trade_correction(measured->rho, flat_trade_probability(*gi),
                                              flat_trade_probability(*gj))
                            .rho;
          break;
        case Method::overlap:
          if (measured)
            out[m][d] = overlap_correction(measured->rho, overlap_expectation(si.arrivals, sj.arrivals,
                                                                              dt, horizon,
                                                                              overlap_stride))
                            .rho;
          break;
        case Method::hayashi_yoshida: out[m][d] = hy; break;
        }
      } catch (const Error&) {
      }
    }
  }
  return out;
}

} // namespace detail

//===========================================================================//
// Epps curves                                                               //
//===========================================================================//

/// Mean estimate and ribbon at each dt over the configured replications.
///
/// single_path: one latent path from stream (seed, 0), re-sampled with
/// replicate seed derive_seed(seed, r + 1). fresh_paths: the latent path is
/// drawn from the replicate seed as well.
inline EppsCurve epps_curve(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.replications;
  std::optional<PricePath> shared;
  if (cfg.protocol == PathProtocol::single_path)
    shared = detail::simulate_latent(cfg, derive_seed(cfg.seed, detail::kPathStream));

  // values[r][method][dt]
  std::vector<std::vector<std::vector<double>>> values(n);
  parallel_for(n, cfg.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, r + 1);
    std::optional<PricePath> own;
    if (!shared) own = detail::simulate_latent(cfg, derive_seed(rep_seed, detail::kPathStream));
    const PricePath& path = shared ? *shared : *own;
    auto [si, sj] = detail::sample_pair(path, cfg.sampler, rep_seed);
    values[r] = detail::estimate_all(si, sj, path.end_time(), cfg.dt_grid, cfg.estimators,
                                     cfg.overlap_stride);
  });

  EppsCurve curve;
  curve.axis_name = "dt";
  for (std::size_t m = 0; m < cfg.estimators.size(); ++m)
    for (std::size_t d = 0; d < cfg.dt_grid.size(); ++d) {
      std::vector<double> column(n);
      for (std::size_t r = 0; r < n; ++r) column[r] = values[r][m][d];
      curve.points.push_back(
          aggregate_point(cfg.dt_grid[d], to_string(cfg.estimators[m]), column, cfg.confidence));
    }

  if (cfg.include_theory) {
    const auto c = detail::induced_correlation(cfg);
    for (double dt : cfg.dt_grid) {
      std::optional<double> theory;
      if (cfg.model == PriceModel::hawkes_price)
        theory = theoretical_hawkes_correlation(cfg.hawkes_price, dt);
      else if (c && cfg.sampler.kind == SamplerKind::poisson)
        theory = theoretical_poisson_epps(*c, cfg.sampler.poisson_rate, dt);
      if (theory) {
        CurvePoint p;
        p.axis = dt;
        p.estimator = std::string(kTheoryEstimator);
        p.mean = *theory;
        curve.points.push_back(p);
      }
    }
  }
  curve.metadata["model"] = to_string(cfg.model);
  curve.metadata["sampler"] = to_string(cfg.sampler.kind);
  curve.metadata["protocol"] = to_string(cfg.protocol);
  curve.metadata["replications"] = std::to_string(n);
  return curve;
}

/// Hayashi-Yoshida estimate against the mean inter-arrival 1/lambda of
/// Poisson re-sampling of one latent path.
inline EppsCurve experiment_hy_vs_interarrival(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.mean_interarrivals.empty()) throw ParameterError("mean_interarrivals must be non-empty");
  const std::size_t n = cfg.replications;
  const std::size_t q_count = cfg.mean_interarrivals.size();
  const PricePath path = detail::simulate_latent(cfg, derive_seed(cfg.seed, detail::kPathStream));

  std::vector<std::vector<double>> values(n, std::vector<double>(q_count, detail::nan()));
  parallel_for(n, cfg.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, r + 1);
    for (std::size_t q = 0; q < q_count; ++q) {
      SamplerConfig s;
      s.kind = SamplerKind::poisson;
      s.poisson_rate = 1.0 / cfg.mean_interarrivals[q];
      auto [si, sj] =
          detail::sample_pair(path, s, derive_seed(rep_seed, detail::kRateStreamBase + q));
      try {
        values[r][q] = hayashi_yoshida(si, sj).rho;
      } catch (const Error&) {
      }
    }
  });

  EppsCurve curve;
  curve.axis_name = "mean_interarrival";
  for (std::size_t q = 0; q < q_count; ++q) {
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) column[r] = values[r][q];
    curve.points.push_back(aggregate_point(cfg.mean_interarrivals[q],
                                           to_string(Method::hayashi_yoshida), column,
                                           cfg.confidence));
  }
  curve.metadata["model"] = to_string(cfg.model);
  curve.metadata["sampler"] = "poisson";
  curve.metadata["replications"] = std::to_string(n);
  return curve;
}

/// Label of the overlap-corrected series at mean inter-arrival `ia`.
inline std::string overlap_series_label(double ia) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "overlap@%g", ia);
  return buf;
}

/// Overlap-corrected Epps curves of one latent path under Poisson sampling
/// at each mean inter-arrival, one series per rate.
inline EppsCurve experiment_overlap_multi_rate(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.mean_interarrivals.empty()) throw ParameterError("mean_interarrivals must be non-empty");
  const std::size_t n = cfg.replications;
  const std::size_t q_count = cfg.mean_interarrivals.size();
  const PricePath path = detail::simulate_latent(cfg, derive_seed(cfg.seed, detail::kPathStream));
  const double horizon = path.end_time();
  const std::vector<Method> methods{Method::overlap};

  // values[r][q][dt]
  std::vector<std::vector<std::vector<double>>> values(n);
  parallel_for(n, cfg.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, r + 1);
    values[r].resize(q_count);
    for (std::size_t q = 0; q < q_count; ++q) {
      SamplerConfig s;
      s.kind = SamplerKind::poisson;
      s.poisson_rate = 1.0 / cfg.mean_interarrivals[q];
      auto [si, sj] =
          detail::sample_pair(path, s, derive_seed(rep_seed, detail::kRateStreamBase + q));
      values[r][q] =
          detail::estimate_all(si, sj, horizon, cfg.dt_grid, methods, cfg.overlap_stride).front();
    }
  });

  EppsCurve curve;
  curve.axis_name = "dt";
  for (std::size_t q = 0; q < q_count; ++q)
    for (std::size_t d = 0; d < cfg.dt_grid.size(); ++d) {
      std::vector<double> column(n);
      for (std::size_t r = 0; r < n; ++r) column[r] = values[r][q][d];
      curve.points.push_back(aggregate_point(
          cfg.dt_grid[d], overlap_series_label(cfg.mean_interarrivals[q]), column, cfg.confidence));
    }
  if (cfg.include_theory && cfg.model == PriceModel::hawkes_price)
    for (double dt : cfg.dt_grid) {
      CurvePoint p;
      p.axis = dt;
      p.estimator = std::string(kTheoryEstimator);
      p.mean = theoretical_hawkes_correlation(cfg.hawkes_price, dt);
      curve.points.push_back(p);
    }
  curve.metadata["model"] = to_string(cfg.model);
  curve.metadata["sampler"] = "poisson";
  curve.metadata["replications"] = std::to_string(n);
  return curve;
}

//===========================================================================//
// Discrimination                                                            //
//===========================================================================//

enum class Classification { discrete_events, diffusion_like, inconclusive };

inline const char* to_string(Classification c) {
  switch (c) {
  case Classification::discrete_events: return "discrete_events";
  case Classification::diffusion_like: return "diffusion_like";
  case Classification::inconclusive: return "inconclusive";
  }
  return "?";
}

struct VerdictRule {
  double tau_abs = 0.05;
  double z = 1.0;
  double early_fraction = 0.10;
  double late_fraction = 0.25;
  double confidence = 0.95; ///< only used when the curve carries no ribbons
};

struct Verdict {
  Classification classification = Classification::inconclusive;
  std::string estimator;
  double rho_early = 0.0;
  double rho_late = 0.0;
  double gap = 0.0; ///< rho_late - rho_early
  double early_half_width = 0.0;
  double late_half_width = 0.0;
  double pooled_half_width = 0.0;
  double threshold = 0.0; ///< max(tau_abs, z * pooled)
  bool ci_overlap = false;
  bool ribbons_from_replicates = false;
  std::size_t n_points = 0, n_early = 0, n_late = 0;
  VerdictRule rule;
};

/// Early-versus-plateau decision rule.
///
/// rho_early is the mean over the smallest early_fraction of the axis,
/// rho_late over the largest late_fraction. The window half-width is the
/// mean point ribbon when the curve has replicate ribbons, otherwise the
/// t-band of the point values inside the window. pooled = RMS of the two.
///   discrete_events  if gap > max(tau_abs, z * pooled)
///   diffusion_like   if |gap| <= tau_abs and |gap| <= z * pooled
///   inconclusive     otherwise
inline Verdict discriminate(const EppsCurve& curve, std::string_view estimator = {},
                            const VerdictRule& rule = {}) {
  std::string name(estimator);
  if (name.empty()) {
    for (const auto& e : curve.estimators())
      if (e != kTheoryEstimator) {
        name = e;
        break;
      }
  }
  std::vector<CurvePoint> pts;
  for (auto& p : curve.series(name))
    if (p.n_ok > 0 && std::isfinite(p.mean)) pts.push_back(p);
  if (pts.size() < 5)
    throw InsufficientDataError("discrimination needs >= 5 curve points (got " +
                                std::to_string(pts.size()) + ")");

  Verdict v;
  v.rule = rule;
  v.estimator = name;
  v.n_points = pts.size();
  const auto count = [&](double frac) {
    return std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(frac * static_cast<double>(pts.size()) - 1e-9)), 1,
        pts.size());
  };
  v.n_early = count(rule.early_fraction);
  v.n_late = count(rule.late_fraction);
  v.ribbons_from_replicates =
      std::any_of(pts.begin(), pts.end(), [](const CurvePoint& p) { return p.n_ok >= 2; });

  const auto window = [&](std::size_t begin, std::size_t len, double& mean, double& hw) {
    std::vector<double> vals, hws;
    for (std::size_t i = begin; i < begin + len; ++i) {
      vals.push_back(pts[i].mean);
      hws.push_back(pts[i].half_width);
    }
    mean = mean_of(vals);
    if (v.ribbons_from_replicates)
      hw = mean_of(hws);
    else if (vals.size() >= 2) {
      const double sd = sample_sd(vals, mean);
      hw = sd == 0.0 ? 0.0
                     : student_t_multiplier(rule.confidence, static_cast<double>(vals.size() - 1)) * sd;
    } else
      hw = 0.0;
  };
  window(0, v.n_early, v.rho_early, v.early_half_width);
  window(pts.size() - v.n_late, v.n_late, v.rho_late, v.late_half_width);

  v.gap = v.rho_late - v.rho_early;
  v.pooled_half_width =
      std::sqrt(0.5 * (v.early_half_width * v.early_half_width + v.late_half_width * v.late_half_width));
  v.threshold = std::max(rule.tau_abs, rule.z * v.pooled_half_width);
  v.ci_overlap = v.rho_early + v.early_half_width >= v.rho_late - v.late_half_width &&
                 v.rho_late + v.late_half_width >= v.rho_early - v.early_half_width;

  if (v.gap > v.threshold)
    v.classification = Classification::discrete_events;
  else if (std::abs(v.gap) <= rule.tau_abs && std::abs(v.gap) <= rule.z * v.pooled_half_width)
    v.classification = Classification::diffusion_like;
  else
    v.classification = Classification::inconclusive;
  return v;
}

//===========================================================================//
// k-skip                                                                    //
//===========================================================================//

struct KSkipResult {
  EppsCurve curve;
  Verdict verdict;
  std::size_t k_requested = 0;
  std::size_t k_used = 0; ///< largest k with >= 2 ticks on both legs
  bool truncated = false;
};

/// Largest k <= k_max keeping floor(#U / k) >= 2 on both legs.
inline std::size_t max_feasible_k(std::size_t ni, std::size_t nj, std::size_t k_max) {
  const std::size_t cap = std::min(ni, nj) / 2;
  return std::min(k_max, cap);
}

/// Hayashi-Yoshida on every k-th tick of both legs for k = 1..k_max, plus
/// the verdict. The k range is cut at the largest feasible k.
inline KSkipResult experiment_k_skip(const TickSeries& si, const TickSeries& sj, std::size_t k_max,
                                     const VerdictRule& rule = {}) {
  if (k_max < 1) throw ParameterError("k_max must be >= 1");
  KSkipResult out;
  out.k_requested = k_max;
  out.k_used = max_feasible_k(si.size(), sj.size(), k_max);
  out.truncated = out.k_used < k_max;
  if (out.k_used == 0) throw InsufficientDataError("k-skip needs >= 2 ticks on both legs");
  out.curve.axis_name = "k";
  for (std::size_t k = 1; k <= out.k_used; ++k) {
    CurvePoint p;
    p.axis = static_cast<double>(k);
    p.estimator = to_string(Method::hayashi_yoshida);
    try {
      p.mean = hayashi_yoshida(k_skip(si, k), k_skip(sj, k)).rho;
      p.n_ok = 1;
    } catch (const Error&) {
      p.n_fail = 1;
    }
    out.curve.points.push_back(p);
  }
  out.curve.metadata["k_requested"] = std::to_string(k_max);
  out.curve.metadata["k_used"] = std::to_string(out.k_used);
  out.verdict = discriminate(out.curve, to_string(Method::hayashi_yoshida), rule);
  return out;
}

/// Ensemble of k-skip curves over several tick-series pairs (e.g. trading
/// days): mean and ribbon at each k with n - 1 degrees of freedom.
inline KSkipResult ensemble_k_skip(const std::vector<std::pair<TickSeries, TickSeries>>& pairs,
                                   std::size_t k_max, double confidence,
                                   const VerdictRule& rule = {}) {
  if (pairs.empty()) throw InsufficientDataError("k-skip ensemble needs at least one pair");
  KSkipResult out;
  out.k_requested = k_max;
  out.k_used = k_max;
  for (const auto& [a, b] : pairs) out.k_used = std::min(out.k_used, max_feasible_k(a.size(), b.size(), k_max));
  out.truncated = out.k_used < k_max;
  if (out.k_used == 0) throw InsufficientDataError("k-skip needs >= 2 ticks on both legs");
  out.curve.axis_name = "k";
  for (std::size_t k = 1; k <= out.k_used; ++k) {
    std::vector<double> column;
    for (const auto& [a, b] : pairs) {
      try {
        column.push_back(hayashi_yoshida(k_skip(a, k), k_skip(b, k)).rho);
      } catch (const Error&) {
        column.push_back(detail::nan());
      }
    }
    out.curve.points.push_back(aggregate_point(static_cast<double>(k),
                                               to_string(Method::hayashi_yoshida), column,
                                               confidence));
  }
  out.curve.metadata["k_requested"] = std::to_string(k_max);
  out.curve.metadata["k_used"] = std::to_string(out.k_used);
  out.curve.metadata["pairs"] = std::to_string(pairs.size());
  out.verdict = discriminate(out.curve, to_string(Method::hayashi_yoshida), rule);
  return out;
}

/// Single simulated tick set (one latent path, one sampling draw) run
/// through the k-skip experiment.
inline KSkipResult simulated_k_skip(const ExperimentConfig& cfg, const VerdictRule& rule = {}) {
  cfg.validate();
  const PricePath path = detail::simulate_latent(cfg, derive_seed(cfg.seed, detail::kPathStream));
  auto [si, sj] = detail::sample_pair(path, cfg.sampler, derive_seed(cfg.seed, 1));
  auto out = experiment_k_skip(si, sj, cfg.k_max, rule);
  out.curve.metadata["model"] = to_string(cfg.model);
  out.curve.metadata["sampler"] = to_string(cfg.sampler.kind);
  return out;
}

} // namespace epps
