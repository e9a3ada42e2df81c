#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace charlotte {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

std::string to_hex(BytesView data);
Bytes from_hex(const std::string& hex);  // throws std::invalid_argument

inline Bytes to_bytes(const std::string& s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
  return std::string(b.begin(), b.end());
}

}  // namespace charlotte
