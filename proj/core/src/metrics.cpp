#include "volregime/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "volregime/error.hpp"

namespace volregime {

PerformanceMetrics compute_metrics(std::span<const double> daily_returns, std::span<const double> equity,
                                   double risk_free_rate, double periods_per_year) {
  const std::size_t n = daily_returns.size();
  if (n == 0) throw ContractError("metrics need at least one daily return");
  if (equity.size() != n) throw ContractError("metrics need one equity value per daily return");

  PerformanceMetrics m;
  double growth = 1.0;
  double sum = 0.0;
  double downside_ss = 0.0;
  for (double r : daily_returns) {
    growth *= 1.0 + r;
    sum += r;
    const double loss = std::min(r, 0.0);
    downside_ss += loss * loss;
  }
  const double count = static_cast<double>(n);
  m.annualized_return = std::pow(growth, periods_per_year / count) - 1.0;

  const double mean = sum / count;
  const auto [lo, hi] = std::minmax_element(daily_returns.begin(), daily_returns.end());
  if (n > 1 && *lo != *hi) {
    double ss = 0.0;
    for (double r : daily_returns) ss += (r - mean) * (r - mean);
    m.daily_sd = std::sqrt(ss / (count - 1.0));
  }
  m.annualized_sd = m.daily_sd * std::sqrt(periods_per_year);

  const double excess = mean - risk_free_rate / periods_per_year;
  if (m.daily_sd > 0.0) m.sharpe = excess / m.daily_sd * std::sqrt(periods_per_year);
  const double downside = std::sqrt(downside_ss / count);
  if (downside > 0.0) m.sortino = excess / downside * std::sqrt(periods_per_year);

  double peak = equity[0] / (1.0 + daily_returns[0]);
  for (double e : equity) {
    peak = std::max(peak, e);
    m.max_drawdown = std::max(m.max_drawdown, (peak - e) / peak);
  }
  if (m.max_drawdown > 0.0) m.calmar = m.annualized_return / m.max_drawdown;
  return m;
}

PerformanceMetrics compute_metrics(std::span<const double> daily_returns, double risk_free_rate,
                                   double periods_per_year) {
  std::vector<double> equity;
  equity.reserve(daily_returns.size());
  double value = 1.0;
  for (double r : daily_returns) {
    value *= 1.0 + r;
    equity.push_back(value);
  }
  return compute_metrics(daily_returns, equity, risk_free_rate, periods_per_year);
}

}  // namespace volregime
