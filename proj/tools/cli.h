// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_TOOLS_CLI_H_
#define DCCRGAN_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace dccrgan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad flags, invalid configuration
inline constexpr int kExitRuntime = 2;  // I/O, numeric or failed checks

/// Runs one subcommand; `args` excludes the program name. Diagnostics go to
/// stderr, data only to the files named on the command line.
int run(std::vector<std::string> args);

/// Flat "key = value" lines with '#' comments.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

}  // namespace dccrgan::cli

#endif  // DCCRGAN_TOOLS_CLI_H_
