#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volregime {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(Date date);
/// Shifts by whole calendar years; Feb 29 maps to Feb 28 in non-leap years.
Date add_years(Date date, int years);

struct PriceObservation {
  Date date;
  double close = 0.0;
};

/// Dated closing prices. Dates strictly increasing, closes positive.
struct PriceSeries {
  std::string ticker;
  std::vector<PriceObservation> observations;

  std::size_t size() const noexcept { return observations.size(); }
  std::vector<double> closes() const;
  std::vector<Date> dates() const;
};

struct ReturnObservation {
  Date date;
  double value = 0.0;
};

/// Dated log returns; each observation carries the later date of its pair.
struct ReturnSeries {
  std::string ticker;
  std::vector<ReturnObservation> observations;

  std::size_t size() const noexcept { return observations.size(); }
  std::vector<double> values() const;
  std::vector<Date> dates() const;
};

/// Reads a `date,close` CSV. Rows may arrive in any order; the result is
/// sorted by date. Throws ParseError (with line number) or ValidationError.
PriceSeries load_prices(const std::filesystem::path& path, std::string ticker);
PriceSeries parse_prices(std::istream& in, std::string ticker);
void write_prices(std::ostream& out, const PriceSeries& prices);

/// Throws ValidationError if dates are not strictly increasing or a close is
/// not positive and finite.
void validate(const PriceSeries& prices);

ReturnSeries log_returns(const PriceSeries& prices);
/// p_t / p_{t-1} - 1, same dating convention as log_returns.
std::vector<double> simple_returns(const PriceSeries& prices);

/// Restricts both series to their common dates.
std::pair<PriceSeries, PriceSeries> align_by_date(const PriceSeries& a, const PriceSeries& b);

}  // namespace volregime
