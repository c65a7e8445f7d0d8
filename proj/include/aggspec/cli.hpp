#ifndef AGGSPEC_CLI_HPP
#define AGGSPEC_CLI_HPP

/**
 * @file cli.hpp
 * @brief Command-line front end: run, sweep, kernel and check subcommands.
 *
 * Exit codes: 0 success, 1 check failed, 2 blowup or strict monitor failure,
 * 64 usage error (including refusing to overwrite without --force),
 * 65 invalid configuration or record, 74 I/O failure.
 */

#include <iosfwd>
#include <string>
#include <vector>

namespace aggspec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBlowup = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDataError = 65;
inline constexpr int kExitIoError = 74;

/// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace aggspec

#endif  // AGGSPEC_CLI_HPP
