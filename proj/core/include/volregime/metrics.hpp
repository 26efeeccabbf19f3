#pragma once

#include <optional>
#include <span>

namespace volregime {

inline constexpr double kTradingDaysPerYear = 252.0;

/// The six validation metrics. Ratios whose denominator is zero are absent.
struct PerformanceMetrics {
  double annualized_return = 0.0;  // AR
  double daily_sd = 0.0;           // SD, sample standard deviation of daily returns
  std::optional<double> sharpe;    // SR
  double max_drawdown = 0.0;       // MD, as a positive fraction
  std::optional<double> sortino;   // SoR
  std::optional<double> calmar;    // CR
  double annualized_sd = 0.0;      // SD * sqrt(252), diagnostics only
};

/// `equity` holds the portfolio value after each day's return; the value
/// before the first day is inferred as equity[0] / (1 + returns[0]) and counts
/// as the initial peak. Requires equal, non-zero lengths.
PerformanceMetrics compute_metrics(std::span<const double> daily_returns,
                                   std::span<const double> equity,
                                   double risk_free_rate = 0.0,
                                   double periods_per_year = kTradingDaysPerYear);

/// Convenience overload compounding `daily_returns` from 1.0.
PerformanceMetrics compute_metrics(std::span<const double> daily_returns,
                                   double risk_free_rate = 0.0,
                                   double periods_per_year = kTradingDaysPerYear);

}  // namespace volregime
