#include "volregime/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "volregime/error.hpp"

namespace volregime {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  // std::from_chars for double is available in libstdc++ 11.
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_int(text.substr(0, 4), y) ||
      !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD", 0);
  }
  const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw ParseError("invalid calendar date '" + std::string(text) + "'", 0);
  return date;
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

Date add_years(Date date, int years) {
  Date shifted = date + std::chrono::years{years};
  if (!shifted.ok()) shifted = shifted.year() / shifted.month() / std::chrono::last;
  return shifted;
}

std::vector<double> PriceSeries::closes() const {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back(o.close);
  return out;
}

std::vector<Date> PriceSeries::dates() const {
  std::vector<Date> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back(o.date);
  return out;
}

std::vector<double> ReturnSeries::values() const {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back(o.value);
  return out;
}

std::vector<Date> ReturnSeries::dates() const {
  std::vector<Date> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back(o.date);
  return out;
}

PriceSeries parse_prices(std::istream& in, std::string ticker) {
  PriceSeries series;
  series.ticker = std::move(ticker);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (line_no == 1 && row.size() >= 3 && static_cast<unsigned char>(row[0]) == 0xEF) {
      row.remove_prefix(3);  // UTF-8 BOM
    }
    if (row.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      const auto comma = row.find(',');
      if (comma == std::string_view::npos || trim(row.substr(0, comma)) != "date" ||
          trim(row.substr(comma + 1)) != "close") {
        throw ParseError("expected header 'date,close'", line_no);
      }
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError("expected two fields 'date,close'", line_no);
    }
    PriceObservation obs;
    try {
      obs.date = parse_date(row.substr(0, comma));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!parse_double(trim(row.substr(comma + 1)), obs.close)) {
      throw ParseError("invalid close '" + std::string(trim(row.substr(comma + 1))) + "'", line_no);
    }
    if (!(obs.close > 0.0) || !std::isfinite(obs.close)) {
      throw ValidationError("line " + std::to_string(line_no) + ": close must be positive, got " +
                            std::string(trim(row.substr(comma + 1))));
    }
    series.observations.push_back(obs);
  }
  if (!header_seen) throw ParseError("empty price file", 0);

  std::stable_sort(series.observations.begin(), series.observations.end(),
                   [](const PriceObservation& a, const PriceObservation& b) { return a.date < b.date; });
  validate(series);
  return series;
}

PriceSeries load_prices(const std::filesystem::path& path, std::string ticker) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open price file " + path.string());
  return parse_prices(in, std::move(ticker));
}

void write_prices(std::ostream& out, const PriceSeries& prices) {
  out << "date,close\n";
  out << std::setprecision(17);
  for (const auto& o : prices.observations) out << format_date(o.date) << ',' << o.close << '\n';
}

void validate(const PriceSeries& prices) {
  for (std::size_t i = 0; i < prices.observations.size(); ++i) {
    const auto& o = prices.observations[i];
    if (!(o.close > 0.0) || !std::isfinite(o.close)) {
      throw ValidationError("close on " + format_date(o.date) + " must be positive");
    }
    if (i > 0 && !(prices.observations[i - 1].date < o.date)) {
      throw ValidationError("duplicate or out-of-order date " + format_date(o.date));
    }
  }
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.size() < 2) throw InsufficientDataError("log returns need at least two prices");
  ReturnSeries out;
  out.ticker = prices.ticker;
  out.observations.reserve(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) {
    const auto& prev = prices.observations[t - 1];
    const auto& cur = prices.observations[t];
    out.observations.push_back({cur.date, std::log(cur.close / prev.close)});
  }
  return out;
}

std::vector<double> simple_returns(const PriceSeries& prices) {
  if (prices.size() < 2) throw InsufficientDataError("simple returns need at least two prices");
  std::vector<double> out;
  out.reserve(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) {
    out.push_back(prices.observations[t].close / prices.observations[t - 1].close - 1.0);
  }
  return out;
}

std::pair<PriceSeries, PriceSeries> align_by_date(const PriceSeries& a, const PriceSeries& b) {
  PriceSeries out_a{a.ticker, {}};
  PriceSeries out_b{b.ticker, {}};
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const auto& da = a.observations[i].date;
    const auto& db = b.observations[j].date;
    if (da < db) {
      ++i;
    } else if (db < da) {
      ++j;
    } else {
      out_a.observations.push_back(a.observations[i++]);
      out_b.observations.push_back(b.observations[j++]);
    }
  }
  return {std::move(out_a), std::move(out_b)};
}

}  // namespace volregime
