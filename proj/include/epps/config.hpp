#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "epps/error.hpp"
#include "epps/experiments.hpp"

namespace epps {

enum class ExperimentKind { epps_curve, hy_vs_interarrival, overlap_multi_rate, k_skip };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
  case ExperimentKind::epps_curve: return "epps_curve";
  case ExperimentKind::hy_vs_interarrival: return "hy_vs_interarrival";
  case ExperimentKind::overlap_multi_rate: return "overlap_multi_rate";
  case ExperimentKind::k_skip: return "k_skip";
  }
  return "?";
}

/// Everything one `epps` run needs.
struct RunConfig {
  ExperimentKind kind = ExperimentKind::epps_curve;
  ExperimentConfig experiment;
  VerdictRule verdict;
  std::string figure; ///< preset name, empty for ad-hoc runs
};

/// Configuration error that names the offending field, e.g. `sampler.kind`.
struct ConfigError : ParameterError {
  ConfigError(const std::string& field, const std::string& what)
      : ParameterError(field + ": " + what), field_path(field) {}
  std::string field_path;
};

namespace config_detail {

using json = nlohmann::json;

inline std::string join(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<std::string_view> known) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) throw ConfigError(join(path, key), "unknown key");
  }
}

inline void read(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  out = j.get<double>();
  if (!std::isfinite(out)) throw ConfigError(path, "must be finite");
}

inline void read(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  out = j.get<bool>();
}

inline void read(const json& j, const std::string& path, std::uint64_t& out) {
  if (!j.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
  out = j.get<std::uint64_t>();
}

inline void read(const json& j, const std::string& path, unsigned& out) {
  std::uint64_t v = 0;
  read(j, path, v);
  out = static_cast<unsigned>(v);
}

inline void read(const json& j, const std::string& path, std::array<double, 2>& out) {
  if (j.is_number()) {
    read(j, path, out[0]);
    out[1] = out[0];
    return;
  }
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a number or a pair");
  read(j[0], path + "[0]", out[0]);
  read(j[1], path + "[1]", out[1]);
}

inline void read(const json& j, const std::string& path, std::vector<double>& out) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    double v = 0.0;
    read(j[i], path + "[" + std::to_string(i) + "]", v);
    out.push_back(v);
  }
}

template <class T>
void maybe(const json& j, const std::string& path, std::string_view key, T& out) {
  if (j.contains(key)) read(j.at(std::string(key)), join(path, key), out);
}

inline std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline PriceModel parse_model(const std::string& s, const std::string& path) {
  if (s == "gbm" || s == "brownian") return PriceModel::gbm;
  if (s == "merton") return PriceModel::merton;
  if (s == "hawkes-price" || s == "hawkes_price") return PriceModel::hawkes_price;
  throw ConfigError(path, "unknown model '" + s + "' (gbm, merton, hawkes-price)");
}

inline Method parse_method(const std::string& s, const std::string& path) {
  if (s == "measured") return Method::measured;
  if (s == "overlap") return Method::overlap;
  if (s == "flat_trade") return Method::flat_trade;
  if (s == "hayashi_yoshida") return Method::hayashi_yoshida;
  throw ConfigError(path, "unknown estimator '" + s +
                              "' (measured, overlap, flat_trade, hayashi_yoshida)");
}

inline void read_gbm(const json& j, const std::string& path, GbmParams& g) {
  reject_unknown(j, path, {"mu", "sigma2", "rho", "dt", "day_length", "x0"});
  maybe(j, path, "mu", g.mu);
  maybe(j, path, "sigma2", g.sigma2);
  maybe(j, path, "rho", g.rho);
  maybe(j, path, "dt", g.dt);
  maybe(j, path, "day_length", g.day_length);
  maybe(j, path, "x0", g.x0);
}

} // namespace config_detail

/// Reads a JSON run configuration on top of `base`. Unknown keys and type
/// mismatches throw ConfigError carrying the field path.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  using namespace config_detail;
  reject_unknown(j, "",
                 {"figure", "experiment", "model", "gbm", "merton", "hawkes_price", "horizon",
                  "sampler", "dt_grid", "mean_interarrivals", "k_max", "estimators",
                  "replications", "confidence", "seed", "protocol", "threads", "overlap_stride",
                  "include_theory", "verdict"});
  RunConfig rc = std::move(base);
  auto& e = rc.experiment;
  if (j.contains("figure")) rc.figure = read_string(j["figure"], "figure");
  if (j.contains("experiment")) {
    const auto s = read_string(j["experiment"], "experiment");
    if (s == "epps_curve") rc.kind = ExperimentKind::epps_curve;
    else if (s == "hy_vs_interarrival") rc.kind = ExperimentKind::hy_vs_interarrival;
    else if (s == "overlap_multi_rate") rc.kind = ExperimentKind::overlap_multi_rate;
    else if (s == "k_skip") rc.kind = ExperimentKind::k_skip;
    else
      throw ConfigError("experiment", "unknown experiment '" + s +
                                          "' (epps_curve, hy_vs_interarrival, "
                                          "overlap_multi_rate, k_skip)");
  }
  if (j.contains("model")) e.model = parse_model(read_string(j["model"], "model"), "model");
  if (j.contains("gbm")) {
    read_gbm(j["gbm"], "gbm", e.gbm);
    e.merton.diffusion = e.gbm;
  }
  if (j.contains("merton")) {
    const auto& m = j["merton"];
    reject_unknown(m, "merton", {"lambda", "a", "b", "diffusion"});
    if (m.contains("diffusion")) read_gbm(m["diffusion"], "merton.diffusion", e.merton.diffusion);
    maybe(m, "merton", "lambda", e.merton.lambda);
    maybe(m, "merton", "a", e.merton.a);
    maybe(m, "merton", "b", e.merton.b);
  }
  if (j.contains("hawkes_price")) {
    const auto& h = j["hawkes_price"];
    reject_unknown(h, "hawkes_price", {"mu", "alpha_r", "alpha_c", "beta", "x0"});
    maybe(h, "hawkes_price", "mu", e.hawkes_price.mu);
    maybe(h, "hawkes_price", "alpha_r", e.hawkes_price.alpha_r);
    maybe(h, "hawkes_price", "alpha_c", e.hawkes_price.alpha_c);
    maybe(h, "hawkes_price", "beta", e.hawkes_price.beta);
    maybe(h, "hawkes_price", "x0", e.hawkes_price.x0);
  }
  maybe(j, "", "horizon", e.horizon);
  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    reject_unknown(s, "sampler", {"kind", "mean_interarrival", "baseline", "alpha", "beta"});
    if (s.contains("kind")) {
      const auto k = read_string(s["kind"], "sampler.kind");
      if (k == "poisson") e.sampler.kind = SamplerKind::poisson;
      else if (k == "hawkes") e.sampler.kind = SamplerKind::hawkes;
      else if (k == "synchronous") e.sampler.kind = SamplerKind::synchronous;
      else throw ConfigError("sampler.kind", "unknown sampler '" + k + "' (poisson, hawkes, synchronous)");
    }
    if (s.contains("mean_interarrival")) {
      double ia = 0.0;
      read(s["mean_interarrival"], "sampler.mean_interarrival", ia);
      if (!(ia > 0.0)) throw ConfigError("sampler.mean_interarrival", "must be > 0");
      e.sampler.poisson_rate = 1.0 / ia;
    }
    maybe(s, "sampler", "baseline", e.sampler.hawkes_baseline);
    maybe(s, "sampler", "alpha", e.sampler.hawkes_alpha);
    maybe(s, "sampler", "beta", e.sampler.hawkes_beta);
  }
  maybe(j, "", "dt_grid", e.dt_grid);
  maybe(j, "", "mean_interarrivals", e.mean_interarrivals);
  if (j.contains("k_max")) {
    std::uint64_t k = 0;
    read(j["k_max"], "k_max", k);
    e.k_max = static_cast<std::size_t>(k);
  }
  if (j.contains("estimators")) {
    const auto& a = j["estimators"];
    if (!a.is_array()) throw ConfigError("estimators", "expected an array of names");
    e.estimators.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto path = "estimators[" + std::to_string(i) + "]";
      e.estimators.push_back(parse_method(read_string(a[i], path), path));
    }
  }
  if (j.contains("replications")) {
    std::uint64_t n = 0;
    read(j["replications"], "replications", n);
    e.replications = static_cast<std::size_t>(n);
  }
  maybe(j, "", "confidence", e.confidence);
  maybe(j, "", "seed", e.seed);
  if (j.contains("protocol")) {
    const auto p = read_string(j["protocol"], "protocol");
    if (p == "single_path") e.protocol = PathProtocol::single_path;
    else if (p == "fresh_paths") e.protocol = PathProtocol::fresh_paths;
    else throw ConfigError("protocol", "unknown protocol '" + p + "' (single_path, fresh_paths)");
  }
  maybe(j, "", "threads", e.threads);
  maybe(j, "", "overlap_stride", e.overlap_stride);
  maybe(j, "", "include_theory", e.include_theory);
  if (j.contains("verdict")) {
    const auto& v = j["verdict"];
    reject_unknown(v, "verdict", {"tau_abs", "z", "early_fraction", "late_fraction", "confidence"});
    maybe(v, "verdict", "tau_abs", rc.verdict.tau_abs);
    maybe(v, "verdict", "z", rc.verdict.z);
    maybe(v, "verdict", "early_fraction", rc.verdict.early_fraction);
    maybe(v, "verdict", "late_fraction", rc.verdict.late_fraction);
    maybe(v, "verdict", "confidence", rc.verdict.confidence);
  }
  return rc;
}

/// Checks the resolved configuration, mapping failures onto field paths.
inline void validate(const RunConfig& rc) {
  const auto& e = rc.experiment;
  try {
    e.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ParameterError& err) {
    throw ConfigError("<config>", err.what());
  }
  if (rc.kind == ExperimentKind::epps_curve || rc.kind == ExperimentKind::overlap_multi_rate) {
    if (e.dt_grid.empty()) throw ConfigError("dt_grid", "must be non-empty");
    if (e.estimators.empty() && rc.kind == ExperimentKind::epps_curve)
      throw ConfigError("estimators", "must be non-empty");
  }
  if ((rc.kind == ExperimentKind::hy_vs_interarrival ||
       rc.kind == ExperimentKind::overlap_multi_rate) &&
      e.mean_interarrivals.empty())
    throw ConfigError("mean_interarrivals", "must be non-empty for " + std::string(to_string(rc.kind)));
  if (rc.kind == ExperimentKind::k_skip && e.k_max < 1) throw ConfigError("k_max", "must be >= 1");
  if (!(rc.verdict.tau_abs >= 0.0)) throw ConfigError("verdict.tau_abs", "must be >= 0");
  if (!(rc.verdict.z >= 0.0)) throw ConfigError("verdict.z", "must be >= 0");
  for (auto [name, f] : {std::pair{"verdict.early_fraction", rc.verdict.early_fraction},
                         std::pair{"verdict.late_fraction", rc.verdict.late_fraction}})
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError(name, "must lie in (0, 1]");
}

/// Fully resolved configuration as JSON (the manifest echo).
inline nlohmann::json to_json(const RunConfig& rc) {
  const auto& e = rc.experiment;
  nlohmann::json j;
  j["figure"] = rc.figure;
  j["experiment"] = to_string(rc.kind);
  j["model"] = to_string(e.model);
  const auto gbm_json = [](const GbmParams& g) {
    return nlohmann::json{{"mu", g.mu},       {"sigma2", g.sigma2},         {"rho", g.rho},
                          {"dt", g.dt},       {"day_length", g.day_length}, {"x0", g.x0}};
  };
  j["gbm"] = gbm_json(e.gbm);
  j["merton"] = {{"diffusion", gbm_json(e.merton.diffusion)},
                 {"lambda", e.merton.lambda},
                 {"a", e.merton.a},
                 {"b", e.merton.b}};
  j["hawkes_price"] = {{"mu", e.hawkes_price.mu},
                       {"alpha_r", e.hawkes_price.alpha_r},
                       {"alpha_c", e.hawkes_price.alpha_c},
                       {"beta", e.hawkes_price.beta},
                       {"x0", e.hawkes_price.x0}};
  j["horizon"] = e.horizon;
  j["sampler"] = {{"kind", to_string(e.sampler.kind)},
                  {"mean_interarrival", 1.0 / e.sampler.poisson_rate},
                  {"baseline", e.sampler.hawkes_baseline},
                  {"alpha", e.sampler.hawkes_alpha},
                  {"beta", e.sampler.hawkes_beta}};
  j["dt_grid"] = e.dt_grid;
  j["mean_interarrivals"] = e.mean_interarrivals;
  j["k_max"] = e.k_max;
  auto& est = j["estimators"] = nlohmann::json::array();
  for (auto m : e.estimators) est.push_back(to_string(m));
  j["replications"] = e.replications;
  j["confidence"] = e.confidence;
  j["seed"] = e.seed;
  j["protocol"] = to_string(e.protocol);
  j["threads"] = e.threads;
  j["overlap_stride"] = e.overlap_stride;
  j["include_theory"] = e.include_theory;
  j["verdict"] = {{"tau_abs", rc.verdict.tau_abs},
                  {"z", rc.verdict.z},
                  {"early_fraction", rc.verdict.early_fraction},
                  {"late_fraction", rc.verdict.late_fraction},
                  {"confidence", rc.verdict.confidence}};
  return j;
}

//===========================================================================//
// Figure presets                                                            //
//===========================================================================//

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"2a", "2b", "3a", "3b", "5",  "6a",
                                              "6b", "8a", "8b", "9",  "10a", "10b"};
  return names;
}

inline std::vector<double> default_dt_grid() { return {1, 2, 5, 10, 15, 20, 30, 50, 75, 100}; }

inline std::vector<double> synchronous_dt_grid() {
  return {1, 2, 5, 10, 15, 20, 30, 50, 75, 100, 150, 200, 300, 500, 750, 1000};
}

/// Simulation parameters shared by every preset.
inline RunConfig base_preset() {
  RunConfig rc;
  auto& e = rc.experiment;
  e.gbm = GbmParams{};           // mu 0.01, sigma2 (0.1, 0.2) per day, rho 0.65, dt 1 s
  e.merton.diffusion = e.gbm;
  e.merton.lambda = {0.2, 0.2};  // jumps per second
  e.merton.a = {0.0, 0.0};
  e.merton.b = {0.001, 0.001};
  e.hawkes_price = HawkesPriceParams{}; // (0.015, 0.023, 0.05, 0.11)
  e.horizon = kSimulationDaySeconds;
  e.sampler.poisson_rate = 1.0 / 15.0;
  e.sampler.hawkes_baseline = 0.015;
  e.sampler.hawkes_alpha = 0.023;
  e.sampler.hawkes_beta = 0.11;
  e.dt_grid = default_dt_grid();
  e.replications = 100;
  e.confidence = 0.95;
  e.seed = 1;
  return rc;
}

/// Parameters of one figure recipe; throws ConfigError for unknown names.
inline RunConfig figure_preset(const std::string& name) {
  RunConfig rc = base_preset();
  rc.figure = name;
  auto& e = rc.experiment;
  const std::vector<Method> all{Method::measured, Method::flat_trade, Method::overlap,
                                Method::hayashi_yoshida};
  const auto epps = [&](PriceModel m, SamplerKind s) {
    rc.kind = ExperimentKind::epps_curve;
    e.model = m;
    e.sampler.kind = s;
    e.estimators = all;
  };
  if (name == "2a") epps(PriceModel::gbm, SamplerKind::poisson);
  else if (name == "2b") epps(PriceModel::gbm, SamplerKind::hawkes);
  else if (name == "3a") epps(PriceModel::merton, SamplerKind::poisson);
  else if (name == "3b") epps(PriceModel::merton, SamplerKind::hawkes);
  else if (name == "5") {
    epps(PriceModel::hawkes_price, SamplerKind::synchronous);
    e.estimators = {Method::measured};
    e.protocol = PathProtocol::fresh_paths;
    e.dt_grid = synchronous_dt_grid();
  } else if (name == "6a") epps(PriceModel::hawkes_price, SamplerKind::poisson);
  else if (name == "6b") epps(PriceModel::hawkes_price, SamplerKind::hawkes);
  else if (name == "8a" || name == "8b") {
    rc.kind = ExperimentKind::hy_vs_interarrival;
    e.model = name == "8a" ? PriceModel::hawkes_price : PriceModel::gbm;
    e.sampler.kind = SamplerKind::poisson;
    e.estimators = {Method::hayashi_yoshida};
    e.mean_interarrivals.clear();
    for (int ia = 1; ia <= 45; ++ia) e.mean_interarrivals.push_back(ia);
  } else if (name == "9") {
    rc.kind = ExperimentKind::overlap_multi_rate;
    e.model = PriceModel::hawkes_price;
    e.sampler.kind = SamplerKind::poisson;
    e.estimators = {Method::overlap};
    e.mean_interarrivals = {1, 10, 25};
  } else if (name == "10a" || name == "10b") {
    rc.kind = ExperimentKind::k_skip;
    e.model = name == "10a" ? PriceModel::hawkes_price : PriceModel::gbm;
    // One Poisson tick set at 1/lambda = 1 s, so k spans mean inter-arrivals 1..50 s.
    e.sampler.kind = SamplerKind::poisson;
    e.sampler.poisson_rate = 1.0;
    e.estimators = {Method::hayashi_yoshida};
    e.k_max = 50;
    e.replications = 1;
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("figure", "unknown preset '" + name + "' (" + known + ")");
  }
  return rc;
}

} // namespace epps
