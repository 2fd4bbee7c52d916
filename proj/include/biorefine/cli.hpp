#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biorefine::cli {

enum ExitCode : int {
  kOk = 0,
  kViolations = 1,  // validation failures in an input corpus
  kUsage = 2,
  kIo = 3,          // missing or unreadable file
  kParse = 4,
  kConfig = 5,
  kData = 6,        // well-formed but unusable input (unknown doc_id, gold post-processing, ...)
  kInternal = 70,
};

// Environment variable naming the default pipeline configuration.
inline constexpr const char* kConfigEnv = "BIOREFINE_CONFIG";

// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biorefine::cli
