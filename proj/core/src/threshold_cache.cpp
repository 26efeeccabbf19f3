#include "volregime/threshold_cache.hpp"

#include <array>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "volregime/error.hpp"

namespace volregime {

namespace {

constexpr std::array<char, 8> kMagic{'V', 'R', 'C', 'P', 'M', 'T', 'H', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "threshold cache files are little-endian; add byte swapping for this target");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& file) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw ParseError("truncated threshold cache " + file.string(), 0);
  return value;
}

}  // namespace

std::filesystem::path default_cache_dir() {
  if (const char* dir = std::getenv(kCacheDirEnv); dir != nullptr && *dir != '\0') return dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0') {
    return std::filesystem::path(xdg) / "volregime";
  }
  if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
    return std::filesystem::path(home) / ".cache" / "volregime";
  }
  return ".volregime-cache";
}

std::string cache_key(const CalibrationParams& p) {
  return "mood_cpm_v" + std::to_string(kFormatVersion) + "_arl" + std::to_string(p.arl0) + "_min" +
         std::to_string(p.min_segment) + "_tmax" + std::to_string(p.t_max) + "_trials" +
         std::to_string(p.trials) + "_seed" + std::to_string(p.seed) + ".bin";
}

void save_table(const std::filesystem::path& file, const ThresholdTable& table) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  // Write to a sibling and rename so concurrent readers never see a partial file.
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write threshold cache " + tmp.string());
    out.write(kMagic.data(), kMagic.size());
    put(out, kFormatVersion);
    put<std::int64_t>(out, table.arl0);
    put<std::int64_t>(out, table.min_segment);
    put<std::int64_t>(out, table.t_max);
    put<std::int64_t>(out, table.trials);
    put<std::uint64_t>(out, table.calibration_seed);
    put<std::uint64_t>(out, table.thresholds.size());
    for (double h : table.thresholds) put(out, h);
    if (!out) throw Error("failed writing threshold cache " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

ThresholdTable load_table(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open threshold cache " + file.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError("not a threshold cache file: " + file.string(), 0);
  if (get<std::uint32_t>(in, file) != kFormatVersion) {
    throw ParseError("unsupported threshold cache version in " + file.string(), 0);
  }
  ThresholdTable table;
  table.arl0 = get<std::int64_t>(in, file);
  table.min_segment = get<std::int64_t>(in, file);
  table.t_max = get<std::int64_t>(in, file);
  table.trials = get<std::int64_t>(in, file);
  table.calibration_seed = get<std::uint64_t>(in, file);
  const auto count = get<std::uint64_t>(in, file);
  if (table.min_segment < 1 || table.t_max < 2 * table.min_segment ||
      count != static_cast<std::uint64_t>(table.t_max - 2 * table.min_segment + 1)) {
    throw ParseError("inconsistent threshold cache header in " + file.string(), 0);
  }
  table.thresholds.resize(count);
  for (auto& h : table.thresholds) h = get<double>(in, file);
  return table;
}

ThresholdTable load_or_calibrate(const CalibrationParams& params, const std::filesystem::path& cache_dir) {
  const auto file = cache_dir / cache_key(params);
  if (std::filesystem::exists(file)) {
    ThresholdTable table = load_table(file);
    if (table.arl0 == params.arl0 && table.min_segment == params.min_segment &&
        table.t_max == params.t_max && table.trials == params.trials &&
        table.calibration_seed == params.seed) {
      return table;
    }
  }
  ThresholdTable table = calibrate_thresholds(params);
  save_table(file, table);
  return table;
}

}  // namespace volregime
