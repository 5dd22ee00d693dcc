#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace circradon {

/// Runs the command-line interface. `args` excludes the program name.
/// Subcommands: phantom, forward, tsvd, dataset, metrics, export.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Environment variable naming the default root for `dataset` output.
inline constexpr const char* kDataRootEnv = "CIRCRADON_DATA_ROOT";

}  // namespace circradon
