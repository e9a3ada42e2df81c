#include "charlotte/keys.hpp"

#include <sodium.h>

#include <cstring>

namespace charlotte {
namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw KeyError("libsodium initialization failed");
}

}  // namespace

KeyPair KeyPair::generate() {
  ensure_sodium();
  KeyPair kp;
  unsigned char pk[crypto_sign_PUBLICKEYBYTES];
  unsigned char sk[crypto_sign_SECRETKEYBYTES];
  crypto_sign_keypair(pk, sk);
  std::memcpy(kp.id_.public_key.data(), pk, 32);
  std::memcpy(kp.secret_.data(), sk, 64);
  return kp;
}

KeyPair KeyPair::from_seed(const std::array<uint8_t, 32>& seed) {
  ensure_sodium();
  KeyPair kp;
  unsigned char pk[crypto_sign_PUBLICKEYBYTES];
  unsigned char sk[crypto_sign_SECRETKEYBYTES];
  if (crypto_sign_seed_keypair(pk, sk, seed.data()) != 0)
    throw KeyError("key derivation failed");
  std::memcpy(kp.id_.public_key.data(), pk, 32);
  std::memcpy(kp.secret_.data(), sk, 64);
  return kp;
}

KeyPair KeyPair::from_seed(uint64_t seed) {
  std::array<uint8_t, 32> s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<uint8_t>(seed >> (8 * i));
  return from_seed(s);
}

Signature KeyPair::sign(BytesView payload) const {
  ensure_sodium();
  Signature sig;
  sig.signer = id_;
  unsigned long long len = 0;
  crypto_sign_detached(sig.bytes.data(), &len, payload.data(), payload.size(),
                       secret_.data());
  return sig;
}

bool verify_signature(BytesView payload, const Signature& sig) {
  ensure_sodium();
  if (sig.signer.scheme != SignatureScheme::Ed25519) return false;
  return crypto_sign_verify_detached(sig.bytes.data(), payload.data(), payload.size(),
                                     sig.signer.public_key.data()) == 0;
}

}  // namespace charlotte
