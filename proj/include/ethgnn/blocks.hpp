#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ethgnn/errors.hpp"
#include "ethgnn/hex.hpp"

namespace ethgnn {

using ordered_json = nlohmann::ordered_json;

struct TxRecord {
  std::string hash;                // 0x + 64 hex digits, lowercase
  std::string from;                // 0x + 40 hex digits, lowercase
  std::optional<std::string> to;   // absent for contract creation
  U256 value;                      // wei
  std::uint64_t gas = 0;
  std::uint64_t gas_price = 0;     // wei per gas

  bool operator==(const TxRecord&) const = default;
};

struct BlockRecord {
  std::uint64_t number = 0;
  std::uint64_t timestamp = 0;
  std::uint64_t gas_limit = 0;
  std::uint64_t gas_used = 0;
  std::vector<TxRecord> transactions;  // RPC order preserved

  bool operator==(const BlockRecord&) const = default;
};

struct BlockRange {
  std::uint64_t start_block = 0;
  std::uint64_t end_block = 0;

  std::uint64_t count() const { return end_block - start_block + 1; }

  void validate() const {
    if (start_block > end_block) {
      throw ConfigError({"block range start " + std::to_string(start_block) +
                         " exceeds end " + std::to_string(end_block)});
    }
  }
};

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw ParseError(std::string("missing or non-string field '") + key + "'");
  }
  return obj[key].get<std::string>();
}

}  // namespace detail

// Decodes a transaction object as returned by eth_getBlockByNumber with the
// full-transaction flag. Extra wire fields are ignored.
inline TxRecord tx_from_json(const nlohmann::json& obj) {
  TxRecord tx;
  tx.hash = normalize_hex_bytes(detail::require_string(obj, "hash"), 32, "tx hash");
  tx.from = normalize_hex_bytes(detail::require_string(obj, "from"), 20, "from address");
  if (obj.contains("to") && !obj["to"].is_null()) {
    tx.to = normalize_hex_bytes(obj["to"].get<std::string>(), 20, "to address");
  }
  tx.value = parse_u256(detail::require_string(obj, "value"));
  tx.gas = parse_hex_u64(detail::require_string(obj, "gas"));
  tx.gas_price = parse_hex_u64(detail::require_string(obj, "gasPrice"));
  return tx;
}

inline BlockRecord block_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) {
    throw ParseError("block payload is not a JSON object");
  }
  BlockRecord b;
  b.number = parse_hex_u64(detail::require_string(obj, "number"));
  b.timestamp = parse_hex_u64(detail::require_string(obj, "timestamp"));
  b.gas_limit = parse_hex_u64(detail::require_string(obj, "gasLimit"));
  b.gas_used = parse_hex_u64(detail::require_string(obj, "gasUsed"));
  if (b.gas_used > b.gas_limit) {
    throw ParseError("block " + std::to_string(b.number) + ": gasUsed exceeds gasLimit");
  }
  if (!obj.contains("transactions") || !obj["transactions"].is_array()) {
    throw ParseError("block " + std::to_string(b.number) + ": missing transactions array");
  }
  for (const auto& t : obj["transactions"]) {
    b.transactions.push_back(tx_from_json(t));
  }
  return b;
}

// Cache encoding: the same keys and 0x-hex quantities as the wire format,
// with a fixed key order so re-serialization is byte-stable.
inline ordered_json tx_to_json(const TxRecord& tx) {
  ordered_json j;
  j["hash"] = tx.hash;
  j["from"] = tx.from;
  j["to"] = tx.to ? ordered_json(*tx.to) : ordered_json(nullptr);
  j["value"] = to_hex(tx.value);
  j["gas"] = to_hex_u64(tx.gas);
  j["gasPrice"] = to_hex_u64(tx.gas_price);
  return j;
}

inline ordered_json block_to_json(const BlockRecord& b) {
  ordered_json j;
  j["number"] = to_hex_u64(b.number);
  j["timestamp"] = to_hex_u64(b.timestamp);
  j["gasLimit"] = to_hex_u64(b.gas_limit);
  j["gasUsed"] = to_hex_u64(b.gas_used);
  j["transactions"] = ordered_json::array();
  for (const auto& tx : b.transactions) {
    j["transactions"].push_back(tx_to_json(tx));
  }
  return j;
}

}  // namespace ethgnn
