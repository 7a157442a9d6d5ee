#ifndef SPIKESEV_CLI_HPP
#define SPIKESEV_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace spikesev {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

/// Runs one subcommand. `args` excludes the program name. Output files go
/// to the configured workdir only; messages go to `out` / `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spikesev

#endif  // SPIKESEV_CLI_HPP
