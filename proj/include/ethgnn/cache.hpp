#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ethgnn/blocks.hpp"

namespace ethgnn {

// NDJSON block cache: one JSON object per line, LF separated, UTF-8.

inline void cache_write(const std::filesystem::path& path,
                        const std::vector<BlockRecord>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot open cache file for writing: " + path.string());
  }
  for (const auto& b : blocks) {
    out << block_to_json(b).dump() << '\n';
  }
  if (!out) {
    throw ParseError("write failed on cache file: " + path.string());
  }
}

inline std::vector<BlockRecord> cache_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open cache file: " + path.string());
  }
  std::vector<BlockRecord> blocks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      blocks.push_back(block_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return blocks;
}

}  // namespace ethgnn
