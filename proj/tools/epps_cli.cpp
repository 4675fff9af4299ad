// epps: command-line front end for the simulation, estimation and
// discrimination library.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "epps/epps.hpp"

#ifndef EPPS_VERSION
#define EPPS_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw epps::ParameterError("cannot read back '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw epps::NumericError("SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

/// Collects outputs and timings, then writes manifest.json next to them.
class Manifest {
public:
  Manifest(std::string command, fs::path out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {}

  void set_config(json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set(const std::string& key, json value) { extra_[key] = std::move(value); }

  void phase(const std::string& name, double seconds) { timings_[name] = seconds; }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) {
    const auto path = out_dir_ / name;
    epps::io::write_file(path.string(), std::forward<Writer>(writer));
    files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) {
    write(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  fs::path finish() {
    json m;
    m["tool"] = "epps";
    m["version"] = EPPS_VERSION;
    m["command"] = command_;
    if (seed_) m["seed"] = *seed_;
    m["config"] = config_;
    for (const auto& [k, v] : extra_.items()) m[k] = v;
    auto& outs = m["outputs"] = json::array();
    for (const auto& f : files_) {
      const auto p = out_dir_ / f;
      outs.push_back({{"file", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    timings_["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["timings_seconds"] = timings_;
    const auto path = out_dir_ / "manifest.json";
    epps::io::write_file(path.string(), [&](std::ostream& o) { o << m.dump(2) << '\n'; });
    return path;
  }

private:
  std::string command_;
  fs::path out_dir_;
  std::chrono::steady_clock::time_point start_;
  json config_ = json::object();
  json extra_ = json::object();
  json timings_ = json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> files_;
};

class Stopwatch {
public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw epps::ParameterError("cannot create output directory '" + dir.string() + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

unsigned default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

//---------------------------------------------------------------------------//
// simulate                                                                  //
//---------------------------------------------------------------------------//

struct SimulateArgs {
  std::string model;
  std::string preset;
  std::string config;
  std::string sampler;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

int run_simulate(const SimulateArgs& a) {
  using namespace epps;
  if (!a.preset.empty() && a.preset != "default")
    throw ConfigError("preset", "unknown preset '" + a.preset + "' (default)");
  RunConfig rc = base_preset();
  if (!a.config.empty()) rc = run_config_from_json(read_json_file(a.config), rc);
  auto& e = rc.experiment;
  if (!a.model.empty()) e.model = config_detail::parse_model(a.model, "--model");
  else if (a.config.empty()) throw UsageError("simulate needs --model or --config");
  if (a.seed) e.seed = *a.seed;
  if (!a.sampler.empty()) {
    if (a.sampler == "poisson") e.sampler.kind = SamplerKind::poisson;
    else if (a.sampler == "hawkes") e.sampler.kind = SamplerKind::hawkes;
    else if (a.sampler == "none" || a.sampler == "synchronous") e.sampler.kind = SamplerKind::synchronous;
    else throw ConfigError("--sampler", "unknown sampler '" + a.sampler + "' (poisson, hawkes, none)");
  }
  validate(rc);

  const fs::path out(a.out);
  ensure_out_dir(out);
  Manifest manifest("simulate", out);
  manifest.set_seed(e.seed);
  manifest.set_config(to_json(rc));
  Stopwatch sw;

  const std::uint64_t path_seed = derive_seed(e.seed, 0);
  PricePath path;
  switch (e.model) {
  case PriceModel::gbm: {
    auto p = e.gbm;
    p.horizon = e.horizon;
    path = simulate_gbm(p, path_seed);
    break;
  }
  case PriceModel::merton: {
    auto p = e.merton;
    p.diffusion.horizon = e.horizon;
    auto m = simulate_merton_detailed(p, path_seed);
    path = std::move(m.path);
    std::vector<ArrivalSet> jumps(2);
    for (int i = 0; i < 2; ++i) {
      jumps[i].horizon = e.horizon;
      jumps[i].times = m.jump_times[i];
    }
    manifest.write("jumps.csv", [&](std::ostream& o) { io::write_arrivals_csv(o, jumps); });
    break;
  }
  case PriceModel::hawkes_price: {
    auto h = hawkes_price_model(e.hawkes_price, e.horizon, path_seed);
    path = std::move(h.path);
    manifest.write("counters.csv", [&](std::ostream& o) { io::write_arrivals_csv(o, h.counters); });
    break;
  }
  }
  manifest.phase("simulate_path", sw.lap());
  manifest.write("path.csv", [&](std::ostream& o) { io::write_path_csv(o, path); });

  if (e.sampler.kind != SamplerKind::synchronous) {
    auto [si, sj] = detail::sample_pair(path, e.sampler, derive_seed(e.seed, 1));
    manifest.write("arrivals.csv", [&](std::ostream& o) {
      io::write_arrivals_csv(o, {si.arrivals, sj.arrivals});
    });
    manifest.write("ticks1.csv", [&](std::ostream& o) { io::write_ticks_csv(o, si); });
    manifest.write("ticks2.csv", [&](std::ostream& o) { io::write_ticks_csv(o, sj); });
    manifest.phase("sample", sw.lap());
  }
  const auto mpath = manifest.finish();
  std::cout << "wrote " << mpath.string() << '\n';
  return kExitOk;
}

//---------------------------------------------------------------------------//
// epps                                                                      //
//---------------------------------------------------------------------------//

struct EppsArgs {
  std::string figure;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out = "out";
  std::vector<double> dt_grid;
  std::vector<double> rates;
  std::optional<std::size_t> kmax;
  std::optional<std::size_t> replications;
};

int run_epps(const EppsArgs& a) {
  using namespace epps;
  if (a.figure.empty() && a.config.empty()) throw UsageError("epps needs --figure or --config");
  RunConfig rc;
  json file_cfg;
  if (!a.config.empty()) file_cfg = read_json_file(a.config);
  std::string figure = a.figure;
  if (figure.empty() && file_cfg.is_object() && file_cfg.contains("figure") && file_cfg["figure"].is_string())
    figure = file_cfg["figure"].get<std::string>();
  rc = figure.empty() ? base_preset() : figure_preset(figure);
  if (!file_cfg.is_null()) rc = run_config_from_json(file_cfg, rc);
  if (!a.figure.empty()) rc.figure = a.figure;
  auto& e = rc.experiment;
  e.threads = default_threads();
  if (!file_cfg.is_null() && file_cfg.contains("threads")) e.threads = file_cfg["threads"].get<unsigned>();
  if (a.threads) e.threads = *a.threads;
  if (a.seed) e.seed = *a.seed;
  if (!a.dt_grid.empty()) e.dt_grid = a.dt_grid;
  if (!a.rates.empty()) e.mean_interarrivals = a.rates;
  if (a.kmax) e.k_max = *a.kmax;
  if (a.replications) e.replications = *a.replications;
  validate(rc);

  const fs::path out(a.out);
  ensure_out_dir(out);
  Manifest manifest("epps", out);
  manifest.set_seed(e.seed);
  manifest.set_config(to_json(rc));
  Stopwatch sw;

  EppsCurve curve;
  std::optional<Verdict> verdict;
  switch (rc.kind) {
  case ExperimentKind::epps_curve: curve = epps_curve(e); break;
  case ExperimentKind::hy_vs_interarrival:
    curve = experiment_hy_vs_interarrival(e);
    verdict = discriminate(curve, to_string(Method::hayashi_yoshida), rc.verdict);
    break;
  case ExperimentKind::overlap_multi_rate: curve = experiment_overlap_multi_rate(e); break;
  case ExperimentKind::k_skip: {
    auto r = simulated_k_skip(e, rc.verdict);
    curve = std::move(r.curve);
    verdict = r.verdict;
    manifest.set("k_skip", {{"k_requested", r.k_requested}, {"k_used", r.k_used}, {"truncated", r.truncated}});
    break;
  }
  }
  if (!rc.figure.empty()) curve.metadata["figure"] = rc.figure;
  curve.metadata["experiment"] = to_string(rc.kind);
  curve.metadata["seed"] = std::to_string(e.seed);
  manifest.phase("experiment", sw.lap());

  manifest.write("curve.csv", [&](std::ostream& o) { io::write_curve_csv(o, curve); });
  manifest.write_json("curve.json", io::to_json(curve));
  if (verdict) {
    manifest.write_json("verdict.json", io::to_json(*verdict));
    std::cout << "verdict: " << to_string(verdict->classification) << " (gap "
              << io::format_number(verdict->gap) << ", threshold "
              << io::format_number(verdict->threshold) << ")\n";
  }
  const auto mpath = manifest.finish();
  std::cout << "wrote " << mpath.string() << '\n';
  return kExitOk;
}

//---------------------------------------------------------------------------//
// taq                                                                       //
//---------------------------------------------------------------------------//

struct TaqArgs {
  std::vector<std::string> inputs;
  std::string pair;
  std::string out = "out";
  std::size_t kmax = 50;
  std::vector<double> dt_grid;
  std::optional<double> session_start;
  double confidence = 0.95;
  bool strict = false;
  std::optional<unsigned> threads;
};

epps::TradeBook load_book(const TaqArgs& a) {
  std::vector<std::string> files;
  auto book = epps::parse_trade_files(a.inputs, {a.strict, true}, &files);
  for (std::size_t i = 0; i < book.diagnostics.size(); ++i)
    std::cerr << "warning: " << files[i] << ":" << book.diagnostics[i].line << ": "
              << book.diagnostics[i].message << " (row skipped)\n";
  return book;
}

std::pair<std::string, std::string> parse_pair(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 2 || parts[0] == parts[1])
    throw UsageError("--pair must name two different tickers as A,B (got '" + s + "')");
  return {parts[0], parts[1]};
}

json taq_config(const TaqArgs& a, const std::string& sub) {
  json j{{"subcommand", sub}, {"inputs", a.inputs}, {"strict", a.strict}};
  if (!a.pair.empty()) j["pair"] = a.pair;
  if (sub == "kskip") j["kmax"] = a.kmax;
  if (sub == "epps") j["dt_grid"] = a.dt_grid.empty() ? epps::default_dt_grid() : a.dt_grid;
  if (sub != "stats") {
    j["confidence"] = a.confidence;
    j["horizon"] = epps::kTradingDaySeconds;
    if (a.session_start) j["session_start"] = *a.session_start;
  }
  return j;
}

epps::DayPairSet load_days(const TaqArgs& a, const epps::TradeBook& book) {
  const auto [ta, tb] = parse_pair(a.pair);
  epps::BuildOptions opts;
  opts.session_start = a.session_start;
  auto set = epps::build_day_pairs(book, ta, tb, opts);
  for (const auto& s : set.skipped) std::cerr << "warning: skipping day " << s.date << ": " << s.reason << '\n';
  if (set.days.empty())
    throw epps::InsufficientDataError("no usable trading days for pair " + ta + "," + tb);
  return set;
}

int run_taq(const std::string& sub, const TaqArgs& a) {
  using namespace epps;
  const fs::path out(a.out);
  Stopwatch sw;
  const auto book = load_book(a);
  ensure_out_dir(out);
  Manifest manifest("taq " + sub, out);
  manifest.set_config(taq_config(a, sub));
  manifest.set("rows", {{"accepted", book.rows_accepted}, {"rejected", book.rows_rejected}});
  manifest.phase("parse", sw.lap());

  if (sub == "stats") {
    json rows = json::array();
    manifest.write("stats.csv", [&](std::ostream& o) {
      o << "ticker,mean,sd,intervals,days\n";
      for (const auto& [ticker, days] : book.trades) {
        const auto s = interarrival_stats(days);
        o << ticker << ',' << io::format_number(s.mean) << ',' << io::format_number(s.sd) << ','
          << s.intervals << ',' << s.days << '\n';
        rows.push_back({{"ticker", ticker},
                        {"mean", io::number_or_null(s.mean)},
                        {"sd", io::number_or_null(s.sd)},
                        {"intervals", s.intervals},
                        {"days", s.days}});
      }
    });
    manifest.write_json("stats.json", rows);
    for (const auto& r : rows) std::cout << r.dump() << '\n';
  } else if (sub == "epps") {
    const auto set = load_days(a, book);
    const auto grid = a.dt_grid.empty() ? default_dt_grid() : a.dt_grid;
    const std::vector<Method> methods{Method::measured, Method::flat_trade, Method::overlap,
                                      Method::hayashi_yoshida};
    auto curve = day_ensemble_curve(set.days, grid, methods, a.confidence, 0.0,
                                    a.threads.value_or(default_threads()));
    curve.metadata["pair"] = a.pair;
    manifest.set("days", {{"used", set.days.size()}, {"skipped", set.skipped.size()}});
    manifest.write("curve.csv", [&](std::ostream& o) { io::write_curve_csv(o, curve); });
    manifest.write_json("curve.json", io::to_json(curve));
    try {
      const auto scaled = saturation_scale(curve);
      manifest.write("curve_scaled.csv", [&](std::ostream& o) { io::write_curve_csv(o, scaled); });
      manifest.write_json("curve_scaled.json", io::to_json(scaled));
    } catch (const Error& err) {
      std::cerr << "warning: saturation scaling skipped: " << err.what() << '\n';
    }
  } else { // kskip
    const auto set = load_days(a, book);
    std::vector<std::pair<TickSeries, TickSeries>> pairs;
    for (const auto& d : set.days) pairs.emplace_back(d.a, d.b);
    auto r = ensemble_k_skip(pairs, a.kmax, a.confidence);
    r.curve.metadata["pair"] = a.pair;
    manifest.set("days", {{"used", set.days.size()}, {"skipped", set.skipped.size()}});
    manifest.set("k_skip", {{"k_requested", r.k_requested}, {"k_used", r.k_used}, {"truncated", r.truncated}});
    if (r.truncated)
      std::cerr << "warning: k range truncated at " << r.k_used << " (requested " << r.k_requested << ")\n";
    manifest.write("curve.csv", [&](std::ostream& o) { io::write_curve_csv(o, r.curve); });
    manifest.write_json("curve.json", io::to_json(r.curve));
    manifest.write_json("verdict.json", io::to_json(r.verdict));
    std::cout << "verdict: " << to_string(r.verdict.classification) << '\n';
  }
  manifest.phase("analysis", sw.lap());
  const auto mpath = manifest.finish();
  std::cout << "wrote " << mpath.string() << '\n';
  return kExitOk;
}

int exit_code_for(const epps::Error& e) {
  switch (e.kind()) {
  case epps::ErrorKind::parameter: return kExitUsage;
  case epps::ErrorKind::data: return kExitData;
  case epps::ErrorKind::numeric: return kExitNumeric;
  }
  return kExitNumeric;
}

std::vector<double> parse_number_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size())
      throw UsageError(flag + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epps-effect simulation, correlation estimation and process discrimination", "epps"};
  app.set_version_flag("--version", EPPS_VERSION);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate a latent price path and its tick samples");
  simulate->add_option("--model", sim.model, "gbm | merton | hawkes-price");
  simulate->add_option("--preset", sim.preset, "parameter preset (default)");
  simulate->add_option("--config", sim.config, "JSON configuration file");
  simulate->add_option("--sampler", sim.sampler, "poisson | hawkes | none (default from config)");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--out", sim.out, "output directory")->capture_default_str();

  EppsArgs ep;
  std::string ep_dt, ep_rates;
  auto* epps_cmd = app.add_subcommand("epps", "run an Epps-curve experiment or figure preset");
  epps_cmd->add_option("--figure", ep.figure, "figure preset: 2a 2b 3a 3b 5 6a 6b 8a 8b 9 10a 10b");
  epps_cmd->add_option("--config", ep.config, "JSON configuration file (overrides the preset)");
  epps_cmd->add_option("--seed", ep.seed, "master seed");
  epps_cmd->add_option("--threads", ep.threads, "worker threads for replications");
  epps_cmd->add_option("--out", ep.out, "output directory")->capture_default_str();
  epps_cmd->add_option("--dt-grid", ep_dt, "comma-separated dt grid in seconds");
  epps_cmd->add_option("--rates", ep_rates, "comma-separated mean inter-arrivals 1/lambda in seconds");
  epps_cmd->add_option("--kmax", ep.kmax, "largest k for k-skip");
  epps_cmd->add_option("--replications", ep.replications, "replication count");

  TaqArgs tq;
  std::string tq_dt;
  auto* taq = app.add_subcommand("taq", "analyse trade files");
  taq->require_subcommand(1);
  std::vector<CLI::App*> taq_subs;
  for (const char* name : {"stats", "epps", "kskip"}) {
    auto* s = taq->add_subcommand(name, name == std::string("stats")
                                            ? "per-ticker inter-arrival mean and sd"
                                        : name == std::string("epps") ? "day-ensemble Epps curves"
                                                                      : "k-skip Hayashi-Yoshida curve and verdict");
    s->add_option("--input,-i", tq.inputs, "trade CSV file(s)")->required();
    s->add_option("--out", tq.out, "output directory")->capture_default_str();
    s->add_flag("--strict", tq.strict, "fail on the first malformed row");
    if (name != std::string("stats")) {
      s->add_option("--pair", tq.pair, "two tickers A,B")->required();
      s->add_option("--session-start", tq.session_start,
                    "session start in seconds since midnight (default 0, or 09:00 for clock timestamps)");
      s->add_option("--confidence", tq.confidence, "ribbon confidence level")->capture_default_str();
      s->add_option("--threads", tq.threads, "worker threads");
    }
    if (name == std::string("kskip")) s->add_option("--kmax", tq.kmax, "largest k")->capture_default_str();
    if (name == std::string("epps")) s->add_option("--dt-grid", tq_dt, "comma-separated dt grid in seconds");
    taq_subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*epps_cmd) {
      if (!ep_dt.empty()) ep.dt_grid = parse_number_list(ep_dt, "--dt-grid");
      if (!ep_rates.empty()) ep.rates = parse_number_list(ep_rates, "--rates");
      return run_epps(ep);
    }
    if (*taq) {
      if (!tq_dt.empty()) tq.dt_grid = parse_number_list(tq_dt, "--dt-grid");
      for (auto* s : taq_subs)
        if (*s) return run_taq(s->get_name(), tq);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const epps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const json::exception& e) {
    std::cerr << "error: configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
