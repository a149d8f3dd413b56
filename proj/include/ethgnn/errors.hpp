#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ethgnn {

// Malformed hex, JSON, cache lines, file formats.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Network-level failure after retries are exhausted.
struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed JSON-RPC response carrying an error object, or a missing result.
struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid run configuration; collects every problem before failing.
struct ConfigError : std::runtime_error {
  std::vector<std::string> problems;
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), problems(std::move(issues)) {}

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid configuration:";
    for (const auto& p : issues) {
      out += "\n  - " + p;
    }
    return out;
  }
};

}  // namespace ethgnn
