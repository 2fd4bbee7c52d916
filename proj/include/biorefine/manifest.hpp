#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace biorefine {

std::string sha256_hex(std::string_view bytes);

// Record of one command invocation. Digests depend only on content, so
// identical inputs and configuration give identical digests.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601
  std::string config_digest;
  std::vector<std::string> arguments;
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, sha256)
  std::vector<std::pair<std::string, std::string>> outputs;

  std::string to_json() const;
};

std::string utc_timestamp();

}  // namespace biorefine
