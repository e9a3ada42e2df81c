#include "charlotte/sha3.hpp"

#include <cstring>

namespace charlotte {
namespace {

constexpr uint64_t kRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

constexpr int kRotations[25] = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                                25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};

inline uint64_t rotl(uint64_t v, int n) {
  return n == 0 ? v : (v << n) | (v >> (64 - n));
}

void keccak_f1600(std::array<uint64_t, 25>& a) {
  for (int round = 0; round < 24; ++round) {
    // theta
    uint64_t c[5], d[5];
    for (int x = 0; x < 5; ++x)
      c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      d[x] = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) a[y + x] ^= d[x];
    }
    // rho + pi
    uint64_t b[25];
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y)
        b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl(a[x + 5 * y], kRotations[x + 5 * y]);
    // chi
    for (int y = 0; y < 25; y += 5)
      for (int x = 0; x < 5; ++x)
        a[y + x] = b[y + x] ^ (~b[y + (x + 1) % 5] & b[y + (x + 2) % 5]);
    // iota
    a[0] ^= kRoundConstants[round];
  }
}

}  // namespace

void Sha3_256::update(const void* data, size_t len) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  while (len > 0) {
    size_t take = std::min(len, kRate - buffered_);
    std::memcpy(buffer_.data() + buffered_, p, take);
    buffered_ += take;
    p += take;
    len -= take;
    if (buffered_ == kRate) {
      for (size_t i = 0; i < kRate / 8; ++i) {
        uint64_t lane;
        std::memcpy(&lane, buffer_.data() + 8 * i, 8);
        state_[i] ^= lane;  // little-endian lanes
      }
      keccak_f1600(state_);
      buffered_ = 0;
    }
  }
}

void Sha3_256::update(BytesView data) { update(data.data(), data.size()); }

std::array<uint8_t, Sha3_256::kDigestSize> Sha3_256::finish() const {
  std::array<uint64_t, 25> st = state_;
  std::array<uint8_t, kRate> block{};
  std::memcpy(block.data(), buffer_.data(), buffered_);
  block[buffered_] = 0x06;  // SHA-3 domain separation + pad10*1 start
  block[kRate - 1] |= 0x80;
  for (size_t i = 0; i < kRate / 8; ++i) {
    uint64_t lane;
    std::memcpy(&lane, block.data() + 8 * i, 8);
    st[i] ^= lane;
  }
  keccak_f1600(st);
  std::array<uint8_t, kDigestSize> out;
  std::memcpy(out.data(), st.data(), kDigestSize);
  return out;
}

std::array<uint8_t, Sha3_256::kDigestSize> Sha3_256::digest(BytesView data) {
  Sha3_256 h;
  h.update(data);
  return h.finish();
}

}  // namespace charlotte
