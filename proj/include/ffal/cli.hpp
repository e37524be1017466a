#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ffal::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Parses `key=value` lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Splices `--config FILE` entries into `args` (args[0] is the subcommand)
/// for every key not already given as a flag. Manifest-only keys such as
/// `version`, `command` and `digest.*` are ignored.
std::vector<std::string> merge_config(const std::vector<std::string>& args);

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ffal::cli
