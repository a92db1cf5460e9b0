#pragma once

#include <stdexcept>
#include <string>

namespace otma {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

/// Configuration parse/validation failure; the message names the offending
/// field or position.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  std::string report_json;
  std::string points_csv;  // empty unless the config requested per-point output
  bool tolerance_pass = false;
};

/// Parse a JSON run configuration, execute the requested command, and
/// assemble the report. Throws ConfigError on malformed or invalid
/// configuration; tolerance failures are reported through the result, not
/// as errors.
RunResult run_config_json(const std::string& config_json);

}  // namespace otma
