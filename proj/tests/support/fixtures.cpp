#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "volregime/seeding.hpp"
#include "volregime/threshold_cache.hpp"

namespace volregime::testing {

const ThresholdTable& default_table() {
  static const ThresholdTable table = load_or_calibrate(CalibrationParams{});
  return table;
}

std::vector<Date> business_days(Date first, Date last) {
  std::vector<Date> out;
  for (std::chrono::sys_days d{first}; d <= std::chrono::sys_days{last}; d += std::chrono::days{1}) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(d);
  }
  return out;
}

World make_world(const WorldSpec& spec) {
  Rng rng = make_rng(spec.seed, 0, 0x776f726c64ULL);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto dates = business_days(spec.first, spec.last);
  World w;
  w.risk.ticker = "RISK";
  w.haven.ticker = "HAVEN";
  double risk = 100.0;
  double haven = 100.0;
  bool storm = false;
  std::size_t left = std::uniform_int_distribution<std::size_t>(spec.calm_min, spec.calm_max)(rng);
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (i > 0) {
      if (left == 0) {
        storm = !storm;
        left = storm ? std::uniform_int_distribution<std::size_t>(spec.storm_min, spec.storm_max)(rng)
                     : std::uniform_int_distribution<std::size_t>(spec.calm_min, spec.calm_max)(rng);
      }
      --left;
      const double r = storm ? spec.storm_drift + spec.storm_sd * z(rng) : spec.calm_drift + spec.calm_sd * z(rng);
      risk *= std::exp(r);
      haven *= std::exp(spec.haven_drift + spec.haven_sd * z(rng));
    }
    w.risk.observations.push_back({dates[i], risk});
    w.haven.observations.push_back({dates[i], haven});
    w.storm.push_back(storm);
  }
  return w;
}

void save_prices(const std::filesystem::path& path, const PriceSeries& prices) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  write_prices(out, prices);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("volregime-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace volregime::testing
