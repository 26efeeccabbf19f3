#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volregime/changepoint.hpp"
#include "volregime/market_data.hpp"
#include "volregime/metrics.hpp"
#include "volregime/regimes.hpp"

namespace volregime {

enum class Holding { risk, haven };

std::string_view to_string(Holding holding);

struct StrategyConfig {
  int train_window_years = 4;
  int lookback_min = 20;
  int lookback_max = 30;
  double trading_days_per_year = kTradingDaysPerYear;
  double risk_free_rate = 0.0;
  /// Fractional cost charged on the day the holding switches.
  double cost_per_switch = 0.0;
  std::string risk_ticker = "SPY";
  std::string haven_ticker = "GLD";
  /// Calendar slack allowed at either end of the required price coverage.
  int coverage_slack_days = 7;
  /// Pins every decision to one asset; used for degenerate-policy checks.
  std::optional<Holding> fixed_holding;
  RegimeConfig regime;

  void validate() const;
};

/// Clusters the strategy flees from: the ceil(r/2) highest-variance
/// clusters, or none when the model has a single cluster.
std::vector<int> avoided_clusters(const RegimeModel& model);

struct RegimeMatch {
  std::size_t segment = 0;
  int cluster = 0;
  bool avoid = false;
  double distance = 0.0;
};

/// Nearest training segment to the recent window under W1 (ties to the
/// earlier segment) and whether its cluster is avoided.
RegimeMatch match_current_regime(const RegimeModel& model, std::span<const double> recent_returns);

/// Aligned daily inputs of one simulation span. Index t is the return earned
/// over (t-1, t]; the decision for day t only sees log_risk[..t-1].
struct MarketSlice {
  std::span<const double> log_risk;
  std::span<const double> simple_risk;
  std::span<const double> simple_haven;
};

struct LookbackScore {
  int lookback = 0;
  std::optional<double> sharpe;
};

/// In-sample Sharpe of the switching rule for one look-back length over days
/// [evaluation_start, size) of `slice`.
std::optional<double> in_sample_sharpe(const RegimeModel& model, const MarketSlice& slice,
                                       int lookback, std::size_t evaluation_start,
                                       const StrategyConfig& config);

/// Best look-back on the training slice by Sharpe (ties to the smallest);
/// every candidate is scored over the same days, starting at lookback_max.
/// Returns lookback_min when no candidate has a defined Sharpe.
int optimize_lookback(const RegimeModel& model, const MarketSlice& training,
                      const StrategyConfig& config, std::vector<LookbackScore>* scores = nullptr);

struct DailyPosition {
  Date date;  // the day whose return this holding earns
  Holding holding = Holding::risk;
  std::size_t matched_segment = 0;
  int matched_cluster = 0;
  double distance = 0.0;
  std::size_t window = 0;
};

struct StrategyResult {
  std::string name;
  std::vector<double> daily_returns;
  std::vector<double> equity;  // value after each day, starting capital 1.0
  PerformanceMetrics metrics;
};

struct WindowSummary {
  Date train_start;
  Date trade_start;
  Date trade_end;  // exclusive
  std::size_t train_days = 0;
  std::size_t trade_days = 0;
  std::size_t n_segments = 0;
  int n_clusters = 0;
  std::vector<std::size_t> cluster_sizes;
  std::vector<int> avoided_clusters;
  int lookback = 0;
  std::vector<LookbackScore> lookback_scores;
};

struct BacktestReport {
  std::vector<Date> dates;  // one per traded day
  std::vector<DailyPosition> positions;
  StrategyResult dynamic;
  StrategyResult hold_risk;
  StrategyResult hold_haven;
  StrategyResult baseline;  // 50/50 rebalanced daily
  std::vector<WindowSummary> windows;
};

/// Walk-forward backtest: consecutive train_window_years trading windows
/// tile [start, end]; each is traded with a regime model and look-back
/// learned on the preceding window. Throws ContractError naming the missing
/// range if the prices do not cover [start - train window, end].
BacktestReport run_backtest(const PriceSeries& risk_prices, const PriceSeries& haven_prices,
                            Date start, Date end, const StrategyConfig& config,
                            const ThresholdTable& table);

}  // namespace volregime
