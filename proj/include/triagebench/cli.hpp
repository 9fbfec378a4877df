#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace triagebench::cli {

struct PowerParams {
  double p0 = 0.0;
  double p1 = 0.0;
  double alpha = 0.0;
  double power = 0.0;
};

// Parsed run configuration document. Unknown sections or keys are rejected.
struct RunConfig {
  std::filesystem::path vignettes;
  std::filesystem::path records;
  std::filesystem::path mapping;
  std::filesystem::path simspec;
  std::filesystem::path out;
  std::vector<std::string> variants;
  bool refine = false;
  std::optional<std::uint64_t> seed;
  std::optional<PowerParams> power;
};

// Relative paths resolve against base_dir (normally the config's directory).
RunConfig parse_run_config(std::string_view cfg_text,
                           std::string_view source_name,
                           const std::filesystem::path& base_dir);

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the binary: args excludes argv[0]. Returns the process
// exit code; all output goes to the given streams.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace triagebench::cli
