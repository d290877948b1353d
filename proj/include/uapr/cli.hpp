#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uapr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Subcommands: eval-batch, eval-session, synth, curves, split-errors.
/// args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace uapr::cli
