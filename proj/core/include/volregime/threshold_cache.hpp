#pragma once

#include <filesystem>
#include <string>

#include "volregime/changepoint.hpp"

namespace volregime {

/// Environment variable naming the threshold cache directory.
inline constexpr const char* kCacheDirEnv = "VOLREGIME_CACHE_DIR";

/// $VOLREGIME_CACHE_DIR, else $XDG_CACHE_HOME/volregime, else ~/.cache/volregime,
/// else ./.volregime-cache.
std::filesystem::path default_cache_dir();

/// File name keyed by every calibration parameter that affects the table.
std::string cache_key(const CalibrationParams& params);

// Binary layout (little-endian):
//   char[8]  magic "VRCPMTH\0"
//   u32      format version (1)
//   i64      arl0, min_segment, t_max, trials
//   u64      seed
//   u64      count
//   f64[count] thresholds for t = 2*min_segment .. t_max
void save_table(const std::filesystem::path& file, const ThresholdTable& table);
ThresholdTable load_table(const std::filesystem::path& file);

/// Loads the cached table for `params` or calibrates and stores it.
ThresholdTable load_or_calibrate(const CalibrationParams& params,
                                 const std::filesystem::path& cache_dir = default_cache_dir());

}  // namespace volregime
