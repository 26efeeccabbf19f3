#include "volregime/strategy.hpp"

#include <algorithm>
#include <cmath>

#include "volregime/error.hpp"

namespace volregime {

std::string_view to_string(Holding holding) { return holding == Holding::risk ? "risk" : "haven"; }

void StrategyConfig::validate() const {
  if (train_window_years < 1) throw ContractError("train_window_years must be positive");
  if (lookback_min < 2 || lookback_max < lookback_min) {
    throw ContractError("look-back grid must be nonempty with a minimum of at least 2");
  }
  if (!(trading_days_per_year > 0.0)) throw ContractError("trading_days_per_year must be positive");
  if (cost_per_switch < 0.0 || cost_per_switch >= 1.0) throw ContractError("cost_per_switch must be in [0, 1)");
}

std::vector<int> avoided_clusters(const RegimeModel& model) {
  const int r = model.cluster_count();
  if (r <= 1) return {};
  const auto count = static_cast<std::size_t>((r + 1) / 2);
  return {model.variance_rank.begin(), model.variance_rank.begin() + static_cast<std::ptrdiff_t>(count)};
}

namespace {

RegimeMatch match_with(const RegimeModel& model, const std::vector<int>& avoided, std::span<const double> recent) {
  if (model.segments.empty()) throw ContractError("regime model has no segments");
  const EmpiricalDist window(std::vector<double>(recent.begin(), recent.end()));
  RegimeMatch match;
  match.distance = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < model.segments.size(); ++j) {
    const double d = wasserstein1(window, model.segments[j]);
    if (d < match.distance) {
      match.distance = d;
      match.segment = j;
    }
  }
  match.cluster = model.assignment.labels[match.segment];
  match.avoid = std::find(avoided.begin(), avoided.end(), match.cluster) != avoided.end();
  return match;
}

double apply_switch_cost(double r, bool switched, double cost) {
  return switched ? r - cost * (1.0 + r) : r;
}

StrategyResult make_result(std::string name, std::vector<double> returns, const StrategyConfig& config) {
  StrategyResult result;
  result.name = std::move(name);
  result.daily_returns = std::move(returns);
  result.equity.reserve(result.daily_returns.size());
  double value = 1.0;
  for (double r : result.daily_returns) {
    value *= 1.0 + r;
    result.equity.push_back(value);
  }
  if (!result.daily_returns.empty()) {
    result.metrics = compute_metrics(result.daily_returns, result.equity, config.risk_free_rate,
                                     config.trading_days_per_year);
  }
  return result;
}

}  // namespace

RegimeMatch match_current_regime(const RegimeModel& model, std::span<const double> recent_returns) {
  if (recent_returns.empty()) throw ContractError("regime matching needs a nonempty window");
  return match_with(model, avoided_clusters(model), recent_returns);
}

std::optional<double> in_sample_sharpe(const RegimeModel& model, const MarketSlice& slice, int lookback,
                                       std::size_t evaluation_start, const StrategyConfig& config) {
  const std::size_t days = slice.log_risk.size();
  if (slice.simple_risk.size() != days || slice.simple_haven.size() != days) {
    throw ContractError("market slice series must have equal lengths");
  }
  const auto n = static_cast<std::size_t>(lookback);
  if (lookback < 1 || evaluation_start < n || evaluation_start >= days) {
    throw ContractError("in-sample evaluation needs look-back history inside the slice");
  }
  const auto avoided = avoided_clusters(model);
  std::vector<double> returns;
  returns.reserve(days - evaluation_start);
  std::optional<Holding> previous;
  for (std::size_t t = evaluation_start; t < days; ++t) {
    Holding holding = Holding::risk;
    if (config.fixed_holding) {
      holding = *config.fixed_holding;
    } else if (!avoided.empty() && match_with(model, avoided, slice.log_risk.subspan(t - n, n)).avoid) {
      holding = Holding::haven;
    }
    const double r = holding == Holding::risk ? slice.simple_risk[t] : slice.simple_haven[t];
    returns.push_back(apply_switch_cost(r, previous && *previous != holding, config.cost_per_switch));
    previous = holding;
  }
  return compute_metrics(returns, config.risk_free_rate, config.trading_days_per_year).sharpe;
}

int optimize_lookback(const RegimeModel& model, const MarketSlice& training, const StrategyConfig& config,
                      std::vector<LookbackScore>* scores) {
  config.validate();
  const auto start = static_cast<std::size_t>(config.lookback_max);
  if (training.log_risk.size() <= start) {
    throw ContractError("training window must be longer than the largest look-back");
  }
  int best = config.lookback_min;
  std::optional<double> best_sharpe;
  if (scores != nullptr) scores->clear();
  for (int n = config.lookback_min; n <= config.lookback_max; ++n) {
    const auto sharpe = in_sample_sharpe(model, training, n, start, config);
    if (scores != nullptr) scores->push_back({n, sharpe});
    if (sharpe && (!best_sharpe || *sharpe > *best_sharpe)) {
      best_sharpe = sharpe;
      best = n;
    }
  }
  return best;
}

BacktestReport run_backtest(const PriceSeries& risk_prices, const PriceSeries& haven_prices, Date start, Date end,
                            const StrategyConfig& config, const ThresholdTable& table) {
  config.validate();
  if (!(start < end)) throw ContractError("backtest start must precede end");
  const auto [risk, haven] = align_by_date(risk_prices, haven_prices);
  const Date needed_from = add_years(start, -config.train_window_years);
  const std::chrono::days slack{config.coverage_slack_days};
  if (risk.size() < 2) {
    throw ContractError("no common price history; need coverage of [" + format_date(needed_from) + ", " +
                        format_date(end) + "]");
  }
  const Date first = risk.observations.front().date;
  const Date last = risk.observations.back().date;
  if (std::chrono::sys_days{first} > std::chrono::sys_days{needed_from} + slack) {
    throw ContractError("prices missing for [" + format_date(needed_from) + ", " + format_date(first) + ")");
  }
  if (std::chrono::sys_days{last} + slack < std::chrono::sys_days{end}) {
    throw ContractError("prices missing for (" + format_date(last) + ", " + format_date(end) + "]");
  }

  const ReturnSeries log_risk_series = log_returns(risk);
  const std::vector<double> log_risk = log_risk_series.values();
  const std::vector<Date> dates = log_risk_series.dates();
  const std::vector<double> simple_risk = simple_returns(risk);
  const std::vector<double> simple_haven = simple_returns(haven);

  auto first_at_or_after = [&](Date d) {
    return static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), d) - dates.begin());
  };

  BacktestReport report;
  std::vector<double> dynamic_r, risk_r, haven_r, baseline_r;
  std::optional<Holding> previous;

  const Date end_exclusive{std::chrono::sys_days{end} + std::chrono::days{1}};
  for (std::size_t w = 0;; ++w) {
    const Date trade_start = add_years(start, static_cast<int>(w) * config.train_window_years);
    if (!(trade_start < end_exclusive)) break;
    Date trade_end = add_years(start, static_cast<int>(w + 1) * config.train_window_years);
    if (end_exclusive < trade_end) trade_end = end_exclusive;

    WindowSummary summary;
    summary.train_start = add_years(trade_start, -config.train_window_years);
    summary.trade_start = trade_start;
    summary.trade_end = trade_end;

    const std::size_t train_lo = first_at_or_after(summary.train_start);
    const std::size_t train_hi = first_at_or_after(trade_start);
    const std::size_t trade_hi = first_at_or_after(trade_end);
    summary.train_days = train_hi - train_lo;
    summary.trade_days = trade_hi - train_hi;
    if (summary.train_days <= static_cast<std::size_t>(config.lookback_max)) {
      throw ContractError("training window starting " + format_date(summary.train_start) +
                          " has too few returns for the look-back grid");
    }

    ReturnSeries train_series;
    train_series.ticker = risk.ticker;
    for (std::size_t i = train_lo; i < train_hi; ++i) train_series.observations.push_back({dates[i], log_risk[i]});
    const RegimeModel model = fit_regimes(train_series, table, config.regime);
    const auto avoided = avoided_clusters(model);

    const MarketSlice training{std::span<const double>(log_risk).subspan(train_lo, summary.train_days),
                               std::span<const double>(simple_risk).subspan(train_lo, summary.train_days),
                               std::span<const double>(simple_haven).subspan(train_lo, summary.train_days)};
    const int lookback = optimize_lookback(model, training, config, &summary.lookback_scores);
    const auto n = static_cast<std::size_t>(lookback);

    const RegimeReport model_report = regime_report(model);
    summary.n_segments = model_report.n_segments;
    summary.n_clusters = model_report.n_clusters;
    summary.cluster_sizes = model_report.cluster_sizes;
    summary.avoided_clusters = avoided;
    summary.lookback = lookback;

    for (std::size_t i = train_hi; i < trade_hi; ++i) {
      // Information through close i-1 decides the holding for return i.
      const RegimeMatch match = match_with(model, avoided, std::span<const double>(log_risk).subspan(i - n, n));
      Holding holding = match.avoid ? Holding::haven : Holding::risk;
      if (config.fixed_holding) holding = *config.fixed_holding;

      report.dates.push_back(dates[i]);
      report.positions.push_back({dates[i], holding, match.segment, match.cluster, match.distance, w});
      const double r = holding == Holding::risk ? simple_risk[i] : simple_haven[i];
      dynamic_r.push_back(apply_switch_cost(r, previous && *previous != holding, config.cost_per_switch));
      previous = holding;
      risk_r.push_back(simple_risk[i]);
      haven_r.push_back(simple_haven[i]);
      baseline_r.push_back(0.5 * (simple_risk[i] + simple_haven[i]));
    }
    report.windows.push_back(std::move(summary));
  }
  if (report.dates.empty()) throw ContractError("no trading days between " + format_date(start) + " and " + format_date(end));

  report.dynamic = make_result("dynamic", std::move(dynamic_r), config);
  report.hold_risk = make_result("hold_" + config.risk_ticker, std::move(risk_r), config);
  report.hold_haven = make_result("hold_" + config.haven_ticker, std::move(haven_r), config);
  report.baseline = make_result("baseline", std::move(baseline_r), config);
  return report;
}

}  // namespace volregime
