#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ethgnn/errors.hpp"

namespace ethgnn {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// Hash of the canonical (insertion-ordered, compact) dump of the run config.
inline std::string config_fingerprint(const nlohmann::ordered_json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

// Every run drops fingerprint.json next to its artifacts; re-running with
// the same fingerprint reproduces the numeric columns.
inline std::string write_fingerprint(const std::filesystem::path& out_dir,
                                     const nlohmann::ordered_json& config) {
  const std::string fp = config_fingerprint(config);
  nlohmann::ordered_json doc;
  doc["fingerprint"] = fp;
  doc["config"] = config;
  std::ofstream out(out_dir / "fingerprint.json", std::ios::binary);
  if (!out) {
    throw ParseError("cannot write fingerprint: " + (out_dir / "fingerprint.json").string());
  }
  out << doc.dump(2) << '\n';
  return fp;
}

}  // namespace ethgnn
