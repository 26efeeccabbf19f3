#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volregime::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Reports go to the
/// files named by --out; `out` receives a short summary, `err` diagnostics.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Manifest written next to an artifact: `dir/stem.json` -> `dir/stem.manifest.json`.
std::string manifest_path_for(const std::string& artifact);

}  // namespace volregime::cli
