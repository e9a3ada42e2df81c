#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "charlotte/bytes.hpp"

namespace charlotte {

// SHA3-256 (FIPS 202). Incremental interface so miners can reuse a
// prefix state across nonce attempts.
class Sha3_256 {
 public:
  static constexpr size_t kDigestSize = 32;
  static constexpr size_t kRate = 136;  // bytes absorbed per permutation

  Sha3_256() = default;

  void update(BytesView data);
  void update(const void* data, size_t len);
  std::array<uint8_t, kDigestSize> finish() const;  // does not consume state

  static std::array<uint8_t, kDigestSize> digest(BytesView data);

 private:
  std::array<uint64_t, 25> state_{};
  std::array<uint8_t, kRate> buffer_{};
  size_t buffered_ = 0;
};

}  // namespace charlotte
