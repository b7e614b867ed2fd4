#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace msmux::cli {

inline constexpr const char* kToolName = "msmux";
inline constexpr const char* kToolVersion = "0.1.0";

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,       // bad flags, unknown/invalid config keys
  kInputFormatError = 3,  // malformed CSV/JSONL/layout input
  kEmptyResult = 4,       // ran, but nothing to report (no kept shots, ...)
  kIoError = 5,           // unreadable input or unwritable output
  kValidationFailed = 6,  // layout violates containment or nonoverlap
};

// Environment variable overriding the output directory when --out is absent.
inline constexpr const char* kOutDirEnv = "MSMUX_OUT_DIR";

// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace msmux::cli
