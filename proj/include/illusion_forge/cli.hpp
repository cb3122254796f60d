#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace illusion_forge {

enum ExitCode : int { kExitOk = 0, kExitProcessing = 1, kExitUsage = 2 };

/// Runs one command line (`args[0]` is the program name). Subcommands:
/// fit-plane, rectify, synth-right, reproject, fuse, confidence-gt, eval,
/// serve. JSON summaries go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace illusion_forge
