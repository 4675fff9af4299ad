#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "epps/error.hpp"
#include "epps/experiments.hpp"
#include "epps/taq.hpp"
#include "epps/types.hpp"

namespace epps::io {

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0"; // also folds -0
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline void write_path_csv(std::ostream& out, const PricePath& path) {
  out << "t,logp1,logp2\n";
  for (std::size_t k = 0; k < path.size(); ++k)
    out << format_number(path.time_at(k)) << ',' << format_number(path.values[k][0]) << ','
        << format_number(path.values[k][1]) << '\n';
}

/// `component,t` rows, components numbered from 1.
inline void write_arrivals_csv(std::ostream& out, const std::vector<ArrivalSet>& sets) {
  out << "component,t\n";
  for (std::size_t c = 0; c < sets.size(); ++c)
    for (double t : sets[c].times) out << c + 1 << ',' << format_number(t) << '\n';
}

inline void write_ticks_csv(std::ostream& out, const TickSeries& s) {
  out << "t,logp\n";
  for (std::size_t k = 0; k < s.size(); ++k)
    out << format_number(s.arrivals.times[k]) << ',' << format_number(s.values[k]) << '\n';
}

inline void write_grid_csv(std::ostream& out, const GridSeries& g) {
  out << "h,t,logp\n";
  for (std::size_t h = 0; h < g.size(); ++h)
    out << h << ',' << format_number(g.time_at(h)) << ',' << format_number(g.values[h]) << '\n';
}

inline void write_curve_csv(std::ostream& out, const EppsCurve& curve) {
  out << "axis,estimator,mean,half_width,n_ok,n_fail\n";
  for (const auto& p : curve.points)
    out << format_number(p.axis) << ',' << p.estimator << ',' << format_number(p.mean) << ','
        << format_number(p.half_width) << ',' << p.n_ok << ',' << p.n_fail << '\n';
}

inline void write_trades_csv(std::ostream& out, const std::vector<TradeRecord>& records) {
  out << "date,ticker,timestamp,price,volume\n";
  for (const auto& r : records)
    out << r.date << ',' << r.ticker << ',' << format_number(r.timestamp) << ','
        << format_number(r.price) << ',' << format_number(r.volume) << '\n';
}

inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const EppsCurve& curve) {
  nlohmann::json j;
  j["axis"] = curve.axis_name;
  j["metadata"] = curve.metadata;
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : curve.points)
    pts.push_back({{"axis", p.axis},
                   {"estimator", p.estimator},
                   {"mean", number_or_null(p.mean)},
                   {"half_width", number_or_null(p.half_width)},
                   {"n_ok", p.n_ok},
                   {"n_fail", p.n_fail}});
  return j;
}

inline nlohmann::json to_json(const Verdict& v) {
  return {{"classification", to_string(v.classification)},
          {"estimator", v.estimator},
          {"rho_early", number_or_null(v.rho_early)},
          {"rho_late", number_or_null(v.rho_late)},
          {"gap", number_or_null(v.gap)},
          {"early_half_width", number_or_null(v.early_half_width)},
          {"late_half_width", number_or_null(v.late_half_width)},
          {"pooled_half_width", number_or_null(v.pooled_half_width)},
          {"threshold", number_or_null(v.threshold)},
          {"ci_overlap", v.ci_overlap},
          {"ribbons_from_replicates", v.ribbons_from_replicates},
          {"n_points", v.n_points},
          {"n_early", v.n_early},
          {"n_late", v.n_late},
          {"rule",
           {{"tau_abs", v.rule.tau_abs},
            {"z", v.rule.z},
            {"early_fraction", v.rule.early_fraction},
            {"late_fraction", v.rule.late_fraction},
            {"confidence", v.rule.confidence}}}};
}

/// Writes text to a file, throwing ParameterError when it cannot be created.
template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  writer(out);
  out.flush();
  if (!out) throw ParameterError("failed while writing '" + path + "'");
}

} // namespace epps::io
