// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eem::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // bad flags, unknown subcommand, invalid config
  kExitData = 2,   // missing or malformed artifacts, contract violations
};

/// Runs one subcommand. `args` excludes the program name. Data written to
/// standard output goes to `out`; logs and errors go to `err`; the chat
/// REPL reads from `in`.
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace eem::cli
