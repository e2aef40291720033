#ifndef LMIX_CLI_COMMANDS_HPP
#define LMIX_CLI_COMMANDS_HPP

#include <iosfwd>

namespace lmix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEstimation = 1;
inline constexpr int kExitInput = 2;

/// Entry point of the `lmix` tool. Subcommands: estimate, lmom dist, lmom
/// sample, identifiability-expo, splq-fit, simulate, scenarios.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lmix::cli

#endif  // LMIX_CLI_COMMANDS_HPP
