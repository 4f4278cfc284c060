#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace affdim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitCheckFailed = 4;
inline constexpr int kCsvSchema = 1;

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  int threads = 0;  // 0: keep the library default ($AFFDIM_THREADS or 1)
  std::string out_dir = ".";
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::string> files;
};

const std::vector<std::string>& command_names();

/// Runs one command and writes <cmd>.csv, <cmd>_summary.csv, <cmd>_plot.csv
/// and <cmd>_manifest.json into out_dir. Never throws.
RunResult run(const std::string& command, const RunOptions& options);

}  // namespace affdim::cli
