#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "charlotte/core.hpp"

namespace charlotte {

struct KeyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ed25519 signing identity. Deterministic key derivation from a 32-byte
// seed keeps test fixtures and sim runs reproducible.
class KeyPair {
 public:
  KeyPair() = default;  // empty identity; assign before signing

  static KeyPair generate();
  static KeyPair from_seed(const std::array<uint8_t, 32>& seed);
  static KeyPair from_seed(uint64_t seed);  // convenience for fixtures

  const CryptoId& id() const { return id_; }

  Signature sign(BytesView payload) const;

 private:
  CryptoId id_;
  std::array<uint8_t, 64> secret_{};
};

bool verify_signature(BytesView payload, const Signature& sig);

// Convenience: sign/verify over a struct's signing_bytes().
template <typename T>
Signature sign_payload(const KeyPair& key, const T& payload) {
  return key.sign(signing_bytes(payload));
}

template <typename T>
bool verify_payload(const T& payload, const Signature& sig) {
  return verify_signature(signing_bytes(payload), sig);
}

}  // namespace charlotte
