#pragma once

#include "imvar/config.hpp"

#include <iosfwd>

namespace imvar {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command. Diagnostics go to `err`; a short summary goes to
/// `out`. Returns 0, 2 (configuration error) or 3 (numerical failure).
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// imvar [command] --config FILE [--seed N] [--threads N] [--verbose]
int cli_main(int argc, char** argv);

}  // namespace imvar
