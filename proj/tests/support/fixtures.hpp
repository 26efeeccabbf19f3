#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "volregime/changepoint.hpp"
#include "volregime/market_data.hpp"

namespace volregime::testing {

/// The default detector table (arl0 10000), loaded from the threshold cache.
const ThresholdTable& default_table();

/// Two-asset market with planted turbulent spells in the risk asset.
struct WorldSpec {
  Date first{std::chrono::year{2000} / 1 / 3};
  Date last{std::chrono::year{2020} / 12 / 31};
  double calm_sd = 0.008;
  double calm_drift = 0.0005;
  double storm_sd = 0.03;
  double storm_drift = -0.004;
  std::size_t calm_min = 150;
  std::size_t calm_max = 400;
  std::size_t storm_min = 40;
  std::size_t storm_max = 100;
  double haven_sd = 0.006;
  double haven_drift = 0.0002;
  std::uint64_t seed = 1;
};

struct World {
  PriceSeries risk;
  PriceSeries haven;
  std::vector<bool> storm;  // per price date
};

/// Monday to Friday dates in [first, last].
std::vector<Date> business_days(Date first, Date last);
World make_world(const WorldSpec& spec);

void save_prices(const std::filesystem::path& path, const PriceSeries& prices);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace volregime::testing
