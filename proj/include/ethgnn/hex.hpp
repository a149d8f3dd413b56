#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "ethgnn/errors.hpp"

namespace ethgnn {

// Unsigned 256-bit integer stored as little-endian 64-bit limbs. Wire values
// stay exact; floating point enters only when features are derived from them.
struct U256 {
  std::array<std::uint64_t, 4> limbs{};

  static U256 from_u64(std::uint64_t v) {
    U256 x;
    x.limbs[0] = v;
    return x;
  }

  bool operator==(const U256&) const = default;

  bool is_zero() const {
    return limbs[0] == 0 && limbs[1] == 0 && limbs[2] == 0 && limbs[3] == 0;
  }

  // Lossy for values above 2^53; only used for feature engineering.
  double to_double() const {
    double out = 0.0;
    for (int k = 3; k >= 0; --k) {
      out = out * 18446744073709551616.0 + static_cast<double>(limbs[k]);
    }
    return out;
  }
};

namespace detail {

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::string_view strip_0x(std::string_view s) {
  if (s.size() < 3 || s[0] != '0' || s[1] != 'x') {
    throw ParseError("hex string must start with 0x and carry at least one digit: '" +
                     std::string(s) + "'");
  }
  return s.substr(2);
}

}  // namespace detail

// Parses a 0x-prefixed hex quantity of up to 256 bits. Rejects everything
// else: missing prefix, empty digits, non-hex characters, overflow.
inline U256 parse_u256(std::string_view s) {
  const std::string_view digits = detail::strip_0x(s);
  if (digits.size() > 64) {
    throw ParseError("hex quantity wider than 256 bits: '" + std::string(s) + "'");
  }
  U256 out;
  std::size_t bit = 0;
  for (std::size_t i = digits.size(); i-- > 0; bit += 4) {
    const int nib = detail::hex_nibble(digits[i]);
    if (nib < 0) {
      throw ParseError("invalid hex digit in '" + std::string(s) + "'");
    }
    out.limbs[bit / 64] |= static_cast<std::uint64_t>(nib) << (bit % 64);
  }
  return out;
}

inline std::uint64_t parse_hex_u64(std::string_view s) {
  const U256 v = parse_u256(s);
  if (v.limbs[1] != 0 || v.limbs[2] != 0 || v.limbs[3] != 0) {
    throw ParseError("hex quantity wider than 64 bits: '" + std::string(s) + "'");
  }
  return v.limbs[0];
}

// Minimal lowercase encoding, "0x0" for zero -- the JSON-RPC quantity format.
inline std::string to_hex(const U256& v) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  bool significant = false;
  for (int nib = 63; nib >= 0; --nib) {
    const unsigned d = (v.limbs[nib / 16] >> ((nib % 16) * 4)) & 0xf;
    if (d != 0) significant = true;
    if (significant) out.push_back(digits[d]);
  }
  if (out.empty()) out = "0";
  return "0x" + out;
}

inline std::string to_hex_u64(std::uint64_t v) { return to_hex(U256::from_u64(v)); }

// 0x-prefixed fixed-width byte-string (addresses, tx hashes): validates the
// width and hex digits, returns the lowercase form.
inline std::string normalize_hex_bytes(std::string_view s, std::size_t n_bytes,
                                       const char* what) {
  const std::string_view digits = detail::strip_0x(s);
  if (digits.size() != 2 * n_bytes) {
    throw ParseError(std::string(what) + " must be 0x followed by " +
                     std::to_string(2 * n_bytes) + " hex digits: '" + std::string(s) + "'");
  }
  std::string out = "0x";
  for (char c : digits) {
    if (detail::hex_nibble(c) < 0) {
      throw ParseError(std::string("invalid hex digit in ") + what + ": '" +
                       std::string(s) + "'");
    }
    out.push_back(c >= 'A' && c <= 'F' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

}  // namespace ethgnn
