#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abstain::cli {

// Runs one subcommand (synth, ingest, train, score, verify, fuse, eval,
// sweep, mock-serve, plot). Writes all artifacts atomically and prints a
// machine-readable JSON summary to `out`. Returns 0 on success, 1 on
// validation/usage errors, 2 on I/O or endpoint errors.
int run_command(const std::vector<std::string>& args, std::ostream& out);

}  // namespace abstain::cli
