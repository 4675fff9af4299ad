#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epps/error.hpp"
#include "epps/estimators.hpp"
#include "epps/experiments.hpp"
#include "epps/numeric.hpp"
#include "epps/stats.hpp"
#include "epps/types.hpp"

namespace epps {

/// Length of the empirical trading window in seconds (7 h 50 min).
inline constexpr double kTradingDaySeconds = 28200.0;

struct TradeRecord {
  std::string date;   ///< YYYY-MM-DD
  std::string ticker;
  double timestamp = 0.0; ///< seconds since the start of the calendar day
  double price = 0.0;
  double volume = 0.0;
};

enum class TimestampFormat { decimal_seconds, clock };

inline const char* to_string(TimestampFormat f) {
  return f == TimestampFormat::decimal_seconds ? "decimal_seconds" : "clock";
}

struct ParseDiagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParseOptions {
  bool strict = false;    ///< throw on the first malformed row instead of skipping it
  bool aggregate = true;  ///< merge equal (ticker, date, timestamp) rows by VWAP
};

/// Parsed trades keyed by ticker, then date; each list sorted by timestamp.
struct TradeBook {
  std::map<std::string, std::map<std::string, std::vector<TradeRecord>>> trades;
  std::vector<ParseDiagnostic> diagnostics;
  std::optional<TimestampFormat> format;
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;

  bool empty() const { return trades.empty(); }

  std::vector<std::string> tickers() const {
    std::vector<std::string> out;
    for (const auto& [t, _] : trades) out.push_back(t);
    return out;
  }

  const std::vector<TradeRecord>* find(const std::string& ticker, const std::string& date) const {
    const auto it = trades.find(ticker);
    if (it == trades.end()) return nullptr;
    const auto jt = it->second.find(date);
    return jt == it->second.end() ? nullptr : &jt->second;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<int> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

inline bool valid_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  const auto y = parse_digits(s.substr(0, 4));
  const auto m = parse_digits(s.substr(5, 2));
  const auto d = parse_digits(s.substr(8, 2));
  if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1) return false;
  static constexpr int days[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (*d > days[*m - 1]) return false;
  if (*m == 2 && *d == 29) {
    const bool leap = (*y % 4 == 0 && *y % 100 != 0) || *y % 400 == 0;
    if (!leap) return false;
  }
  return true;
}

/// HH:MM:SS or HH:MM:SS.fff -> seconds since midnight.
inline std::optional<double> parse_clock(std::string_view s) {
  if (s.size() < 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
  const auto h = parse_digits(s.substr(0, 2));
  const auto m = parse_digits(s.substr(3, 2));
  if (!h || !m || *h > 23 || *m > 59) return std::nullopt;
  const auto sec_text = s.substr(6);
  if (sec_text.size() < 2 || sec_text[0] < '0' || sec_text[0] > '9' || sec_text[1] < '0' ||
      sec_text[1] > '9')
    return std::nullopt;
  if (sec_text.size() > 2 && (sec_text[2] != '.' || sec_text.size() == 3)) return std::nullopt;
  const auto sec = parse_double(sec_text);
  if (!sec || *sec >= 60.0) return std::nullopt;
  return static_cast<double>(*h * 3600 + *m * 60) + *sec;
}

/// Merges runs of equal timestamps into one record with the volume-weighted
/// price and the summed volume. Input must be sorted by timestamp.
inline std::vector<TradeRecord> aggregate_equal_timestamps(const std::vector<TradeRecord>& in) {
  std::vector<TradeRecord> out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t j = i;
    CompensatedSum notional, volume;
    while (j < in.size() && in[j].timestamp == in[i].timestamp) {
      notional += in[j].price * in[j].volume;
      volume += in[j].volume;
      ++j;
    }
    TradeRecord r = in[i];
    if (j - i > 1) {
      r.volume = volume.value();
      r.price = notional.value() / r.volume;
    }
    out.push_back(std::move(r));
    i = j;
  }
  return out;
}

inline void finalize_book(TradeBook& book, bool aggregate) {
  for (auto& [ticker, days] : book.trades)
    for (auto& [date, recs] : days) {
      std::stable_sort(recs.begin(), recs.end(), [](const TradeRecord& a, const TradeRecord& b) {
        return a.timestamp < b.timestamp;
      });
      if (aggregate) recs = aggregate_equal_timestamps(recs);
    }
}

} // namespace detail

/// Reads `date,ticker,timestamp,price,volume` rows.
///
/// The timestamp format (decimal seconds or HH:MM:SS[.fff]) is fixed by the
/// first data row; rows in the other format are malformed. Malformed rows
/// are skipped with a line-numbered diagnostic unless options.strict is set.
/// A missing or different header is always fatal.
inline TradeBook parse_trades(std::istream& in, const ParseOptions& options = {}) {
  TradeBook book;
  std::string line;
  std::size_t line_no = 0;

  // header: first non-blank line
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
      line.erase(0, 3); // UTF-8 byte order mark
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv(line);
    static constexpr std::string_view expected[] = {"date", "ticker", "timestamp", "price", "volume"};
    bool ok = cols.size() == 5;
    for (std::size_t c = 0; ok && c < 5; ++c) ok = cols[c] == expected[c];
    if (!ok)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected header 'date,ticker,timestamp,price,volume', got '" + line + "'");
    have_header = true;
    break;
  }
  if (!have_header) throw ParseError("trade file is empty (no header)");

  std::vector<TradeRecord> rows;
  const auto reject = [&](const std::string& why) {
    const std::string msg = "line " + std::to_string(line_no) + ": " + why;
    if (options.strict) throw ParseError(msg);
    book.diagnostics.push_back({line_no, why});
    ++book.rows_rejected;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv(line);
    if (cols.size() != 5) {
      reject("expected 5 fields, got " + std::to_string(cols.size()));
      continue;
    }
    TradeRecord r;
    if (!detail::valid_iso_date(cols[0])) {
      reject("bad date '" + std::string(cols[0]) + "' (want YYYY-MM-DD)");
      continue;
    }
    r.date = std::string(cols[0]);
    if (cols[1].empty()) {
      reject("empty ticker");
      continue;
    }
    r.ticker = std::string(cols[1]);

    const bool looks_clock = cols[2].find(':') != std::string_view::npos;
    const TimestampFormat fmt = looks_clock ? TimestampFormat::clock : TimestampFormat::decimal_seconds;
    if (book.format && *book.format != fmt) {
      reject("timestamp '" + std::string(cols[2]) + "' does not match the file's " +
             to_string(*book.format) + " format");
      continue;
    }
    const auto ts = looks_clock ? detail::parse_clock(cols[2]) : detail::parse_double(cols[2]);
    if (!ts || *ts < 0.0 || *ts >= 86400.0) {
      reject("bad timestamp '" + std::string(cols[2]) + "'");
      continue;
    }
    const auto price = detail::parse_double(cols[3]);
    if (!price || !(*price > 0.0)) {
      reject("price must be a positive number, got '" + std::string(cols[3]) + "'");
      continue;
    }
    const auto volume = detail::parse_double(cols[4]);
    if (!volume || !(*volume > 0.0)) {
      reject("volume must be a positive number, got '" + std::string(cols[4]) + "'");
      continue;
    }
    if (!book.format) book.format = fmt;
    r.timestamp = *ts;
    r.price = *price;
    r.volume = *volume;
    rows.push_back(std::move(r));
    ++book.rows_accepted;
  }

  for (auto& r : rows) book.trades[r.ticker][r.date].push_back(std::move(r));
  detail::finalize_book(book, options.aggregate);
  return book;
}

inline TradeBook parse_trades_file(const std::string& path, const ParseOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trade file '" + path + "'");
  return parse_trades(in, options);
}

/// Parses several files into one book. Rows of the same (ticker, date) from
/// different files are merged before sorting and aggregation; diagnostics
/// keep their file-local line numbers.
inline TradeBook parse_trade_files(const std::vector<std::string>& paths,
                                   const ParseOptions& options = {},
                                   std::vector<std::string>* diagnostic_files = nullptr) {
  TradeBook merged;
  ParseOptions raw = options;
  raw.aggregate = false;
  for (const auto& path : paths) {
    auto book = parse_trades_file(path, raw);
    if (book.format) {
      if (merged.format && *merged.format != *book.format)
        throw ParseError("'" + path + "' uses " + to_string(*book.format) +
                         " timestamps but earlier files use " + to_string(*merged.format));
      merged.format = book.format;
    }
    for (auto& d : book.diagnostics) {
      merged.diagnostics.push_back(std::move(d));
      if (diagnostic_files) diagnostic_files->push_back(path);
    }
    merged.rows_accepted += book.rows_accepted;
    merged.rows_rejected += book.rows_rejected;
    for (auto& [ticker, days] : book.trades)
      for (auto& [date, recs] : days) {
        auto& dst = merged.trades[ticker][date];
        dst.insert(dst.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
      }
  }
  detail::finalize_book(merged, options.aggregate);
  return merged;
}

//===========================================================================//
// Day pairs                                                                 //
//===========================================================================//

/// Log-price series of two tickers on one day, with t = 0 at the first moment
/// both have traded.
struct DayPair {
  std::string date;
  TickSeries a, b;
  double origin = 0.0;  ///< seconds since midnight mapped to t = 0
  double horizon = kTradingDaySeconds;
};

struct BuildOptions {
  /// Trades before this time of day are ignored. Unset: 0 for decimal
  /// timestamps, 09:00:00 for clock timestamps.
  std::optional<double> session_start;
  double horizon = kTradingDaySeconds;

  double resolved_session_start(std::optional<TimestampFormat> fmt) const {
    if (session_start) return *session_start;
    return fmt == TimestampFormat::clock ? 9.0 * 3600.0 : 0.0;
  }
};

/// pair is empty when the day has to be skipped; reason says why.
struct DayBuild {
  std::optional<DayPair> pair;
  std::string skip_reason;
};

/// Aligns two tickers' trades for one day.
///
/// origin = max(first trade of a, first trade of b) after session_start. Each
/// leg starts at t = 0 with its last trade at or before the origin; later
/// trades keep their offset t - origin while t - origin <= horizon. The day is
/// skipped when either leg has no trade in the session or the origin falls
/// after session_start + horizon.
inline DayBuild build_day_pair(const std::vector<TradeRecord>& records_a,
                               const std::vector<TradeRecord>& records_b,
                               double session_start = 0.0,
                               double horizon = kTradingDaySeconds) {
  if (!(horizon > 0.0)) throw ParameterError("day horizon must be > 0");
  DayBuild out;
  const auto first_in_session = [&](const std::vector<TradeRecord>& r) {
    return std::find_if(r.begin(), r.end(),
                        [&](const TradeRecord& x) { return x.timestamp >= session_start; });
  };
  const auto fa = first_in_session(records_a);
  const auto fb = first_in_session(records_b);
  if (fa == records_a.end() || fb == records_b.end()) {
    out.skip_reason = fa == records_a.end() ? "first leg has no trades in the session"
                                            : "second leg has no trades in the session";
    return out;
  }
  const double origin = std::max(fa->timestamp, fb->timestamp);
  if (origin > session_start + horizon) {
    out.skip_reason = "first common trade falls after the trading window";
    return out;
  }
  const auto leg = [&](auto first, const std::vector<TradeRecord>& r) {
    TickSeries s;
    s.arrivals.horizon = horizon;
    auto it = first;
    // last trade at or before the origin
    auto standing = it;
    while (it != r.end() && it->timestamp <= origin) standing = it++;
    s.arrivals.times.push_back(0.0);
    s.values.push_back(std::log(standing->price));
    for (; it != r.end(); ++it) {
      const double t = it->timestamp - origin;
      if (t > horizon) break;
      s.arrivals.times.push_back(t);
      s.values.push_back(std::log(it->price));
    }
    return s;
  };
  DayPair p;
  p.date = records_a.front().date;
  p.origin = origin;
  p.horizon = horizon;
  p.a = leg(fa, records_a);
  p.b = leg(fb, records_b);
  out.pair = std::move(p);
  return out;
}

struct SkippedDay {
  std::string date;
  std::string reason;
};

struct DayPairSet {
  std::vector<DayPair> days;
  std::vector<SkippedDay> skipped;
};

/// Day pairs for every date on which either ticker traded, in date order.
inline DayPairSet build_day_pairs(const TradeBook& book, const std::string& ticker_a,
                                  const std::string& ticker_b, const BuildOptions& options = {}) {
  const double session_start = options.resolved_session_start(book.format);
  std::vector<std::string> dates;
  for (const auto& t : {ticker_a, ticker_b}) {
    const auto it = book.trades.find(t);
    if (it == book.trades.end()) continue;
    for (const auto& [d, _] : it->second) dates.push_back(d);
  }
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  DayPairSet out;
  static const std::vector<TradeRecord> none;
  for (const auto& d : dates) {
    const auto* ra = book.find(ticker_a, d);
    const auto* rb = book.find(ticker_b, d);
    auto built = build_day_pair(ra ? *ra : none, rb ? *rb : none, session_start, options.horizon);
    if (built.pair) {
      built.pair->date = d;
      out.days.push_back(std::move(*built.pair));
    } else {
      out.skipped.push_back({d, built.skip_reason});
    }
  }
  return out;
}

//===========================================================================//
// Statistics                                                                //
//===========================================================================//

struct InterarrivalStats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  std::size_t intervals = 0;
  std::size_t days = 0; ///< days that contributed at least one interval
};

/// Pooled within-day inter-arrival mean and sample standard deviation.
/// Gaps across day boundaries are never formed.
inline InterarrivalStats interarrival_stats(
    const std::map<std::string, std::vector<TradeRecord>>& days) {
  std::vector<double> gaps;
  InterarrivalStats s;
  for (const auto& [_, recs] : days) {
    if (recs.size() < 2) continue;
    ++s.days;
    for (std::size_t k = 1; k < recs.size(); ++k) gaps.push_back(recs[k].timestamp - recs[k - 1].timestamp);
  }
  s.intervals = gaps.size();
  if (gaps.empty()) return s;
  s.mean = mean_of(gaps);
  s.sd = gaps.size() >= 2 ? sample_sd(gaps, s.mean) : 0.0;
  return s;
}

/// Divides every non-theory series (means and half-widths) by the saturation
/// level: the mean of the `reference` estimator over the largest 10% of the
/// axis.
inline EppsCurve saturation_scale(const EppsCurve& curve,
                                  std::string_view reference = "measured") {
  auto ref = curve.series(reference);
  std::erase_if(ref, [](const CurvePoint& p) { return p.n_ok == 0 || !std::isfinite(p.mean); });
  if (ref.empty())
    throw InsufficientDataError("saturation scaling needs a non-empty '" + std::string(reference) +
                                "' series");
  const auto top = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(0.10 * static_cast<double>(ref.size()) - 1e-9)));
  std::vector<double> tail;
  for (std::size_t i = ref.size() - top; i < ref.size(); ++i) tail.push_back(ref[i].mean);
  const double level = mean_of(tail);
  if (!(level > 0.0))
    throw ScalingError("saturation level must be > 0 (got " + std::to_string(level) + ")");
  EppsCurve out = curve;
  for (auto& p : out.points) {
    if (p.estimator == kTheoryEstimator) continue;
    p.mean /= level;
    p.half_width /= level;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", level);
  out.metadata["saturation_level"] = buf;
  out.metadata["saturation_rule"] = "mean of " + std::string(reference) +
                                    " over the top 10% of the axis (artifact convention)";
  return out;
}

/// Per-day estimates on a dt grid aggregated across days (t quantile at
/// n_days - 1 degrees of freedom). Failing days count in n_fail.
inline EppsCurve day_ensemble_curve(const std::vector<DayPair>& days,
                                    const std::vector<double>& dt_grid,
                                    const std::vector<Method>& methods, double confidence = 0.95,
                                    double overlap_stride = 0.0, unsigned threads = 1) {
  if (days.empty()) throw InsufficientDataError("no usable trading days");
  std::vector<std::vector<std::vector<double>>> values(days.size());
  parallel_for(days.size(), threads, [&](std::size_t d) {
    values[d] = detail::estimate_all(days[d].a, days[d].b, days[d].horizon, dt_grid, methods,
                                     overlap_stride);
  });
  EppsCurve curve;
  curve.axis_name = "dt";
  for (std::size_t m = 0; m < methods.size(); ++m)
    for (std::size_t g = 0; g < dt_grid.size(); ++g) {
      std::vector<double> column(days.size());
      for (std::size_t d = 0; d < days.size(); ++d) column[d] = values[d][m][g];
      curve.points.push_back(aggregate_point(dt_grid[g], to_string(methods[m]), column, confidence));
    }
  curve.metadata["days"] = std::to_string(days.size());
  return curve;
}

} // namespace epps
