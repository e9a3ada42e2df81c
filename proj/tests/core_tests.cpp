#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <openssl/evp.h>

#include <random>
#include <set>

#include "charlotte/core.hpp"
#include "charlotte/keys.hpp"
#include "charlotte/sha3.hpp"
#include "doctest.h"

using namespace charlotte;

namespace {

Bytes openssl_sha3_256(BytesView data) {
  Bytes out(32);
  unsigned int n = 0;
  EVP_Digest(data.data(), data.size(), out.data(), &n, EVP_sha3_256(), nullptr);
  REQUIRE(n == 32);
  return out;
}

Block opaque(const std::string& payload, std::vector<Reference> parents = {}) {
  return OpaqueData{to_bytes(payload), std::move(parents)};
}

// Random block generator covering every variant, for property tests.
Block random_block(std::mt19937_64& rng, int depth = 0) {
  auto rand_bytes = [&](size_t max_len) {
    std::uniform_int_distribution<size_t> len(0, max_len);
    Bytes b(len(rng));
    for (auto& x : b) x = static_cast<uint8_t>(rng());
    return b;
  };
  auto rand_hash = [&] {
    Hash h;
    for (auto& x : h.digest) x = static_cast<uint8_t>(rng());
    return h;
  };
  auto rand_id = [&] {
    CryptoId id;
    for (auto& x : id.public_key) x = static_cast<uint8_t>(rng());
    return id;
  };
  auto rand_sig = [&] {
    Signature s;
    s.signer = rand_id();
    for (auto& x : s.bytes) x = static_cast<uint8_t>(rng());
    return s;
  };
  auto rand_ref = [&] {
    std::vector<Hash> avail;
    for (int i = rng() % 3; i > 0; --i) avail.push_back(rand_hash());
    std::vector<Reference> integ;
    if (depth < 2)
      for (int i = rng() % 2; i > 0; --i) integ.push_back(Reference::to(rand_hash()));
    return make_reference(rand_hash(), avail, integ);
  };
  auto rand_value = [&] {
    HetconsValue v;
    for (int i = 1 + rng() % 2; i > 0; --i)
      v.chain_slots.emplace_back(rand_ref(), rng() % 10 + 1);
    v.block = rand_ref();
    canonicalize_value(v);
    return v;
  };

  switch (rng() % 9) {
    case 0: {
      std::vector<Reference> parents;
      for (int i = rng() % 3; i > 0; --i) parents.push_back(rand_ref());
      return OpaqueData{rand_bytes(40), parents};
    }
    case 1:
      return TypeDescription{std::string(rng() % 20, 'q')};
    case 2: {
      StoreForever a;
      a.subject = rand_ref();
      std::vector<Hash> covered;
      for (int i = rng() % 3; i > 0; --i) covered.push_back(rand_hash());
      std::sort(covered.begin(), covered.end());
      covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
      a.covered = covered;
      a.issuer = rand_id();
      a.signature = rand_sig();
      return a;
    }
    case 3: {
      ChainSlotAtt a;
      a.block = rand_ref();
      a.root = rand_ref();
      a.slot = rng() % 100 + 1;
      a.parent = rand_ref();
      a.issuer = rand_id();
      a.signature = rand_sig();
      return IntegrityAttestation{a};
    }
    case 4: {
      TimestampBatchAtt a;
      a.time_ms = static_cast<int64_t>(rng() % 1000000);
      for (int i = 1 + rng() % 3; i > 0; --i) a.subjects.push_back(rand_ref());
      a.issuer = rand_id();
      a.signature = rand_sig();
      return IntegrityAttestation{a};
    }
    case 5: {
      NakamotoAtt a;
      a.block = rand_ref();
      a.parent = rand_ref();
      a.nonce = rng();
      return IntegrityAttestation{a};
    }
    case 6: {
      GitBranchAtt a;
      a.time_ms = static_cast<int64_t>(rng() % 1000000);
      a.branch_name = "b" + std::to_string(rng() % 100);
      a.commit = rand_ref();
      a.issuer = rand_id();
      a.signature = rand_sig();
      return IntegrityAttestation{a};
    }
    case 7: {
      GitCommit c;
      c.comment = "c" + std::to_string(rng() % 100);
      c.content_hash = rand_hash();
      if (rng() % 2 == 0) {
        c.body = rand_bytes(30);
      } else {
        std::vector<GitCommit::Parent> ps;
        for (int i = 1 + rng() % 2; i > 0; --i)
          ps.push_back(GitCommit::Parent{rand_ref(), rand_bytes(10)});
        c.body = ps;
      }
      c.author = rand_id();
      c.signature = rand_sig();
      return c;
    }
    default: {
      HetconsMessageAtt a;
      a.phase = static_cast<HetconsPhase>(1 + rng() % 4);
      a.ballot = Ballot{rng() % 10, rand_id()};
      a.value = rand_value();
      if (rng() % 2 == 0) a.accepted = std::make_pair(Ballot{rng() % 5, rand_id()}, rand_value());
      std::vector<Reference> just;
      for (int i = rng() % 3; i > 0; --i) just.push_back(Reference::to(rand_hash()));
      sort_reference_set(just);
      a.justification = just;
      a.sender = rand_id();
      a.signature = rand_sig();
      return IntegrityAttestation{a};
    }
  }
}

}  // namespace

TEST_CASE("sha3-256 matches NIST vectors") {
  CHECK(to_hex(Sha3_256::digest({})) ==
        "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
  CHECK(to_hex(Sha3_256::digest(to_bytes("abc"))) ==
        "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532");
  // long input crossing several rate blocks
  Bytes big(1000);
  for (size_t i = 0; i < big.size(); ++i) big[i] = static_cast<uint8_t>(i);
  CHECK(Sha3_256::digest(big) ==
        *reinterpret_cast<const std::array<uint8_t, 32>*>(openssl_sha3_256(big).data()));
}

TEST_CASE("sha3-256 agrees with openssl on random inputs") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Bytes data(rng() % 500);
    for (auto& b : data) b = static_cast<uint8_t>(rng());
    auto ours = Sha3_256::digest(data);
    auto theirs = openssl_sha3_256(data);
    CHECK(std::equal(ours.begin(), ours.end(), theirs.begin()));
  }
}

TEST_CASE("sha3-256 incremental equals one-shot") {
  Bytes data(777);
  for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<uint8_t>(i * 31);
  Sha3_256 h;
  h.update(BytesView(data).subspan(0, 100));
  h.update(BytesView(data).subspan(100, 500));
  h.update(BytesView(data).subspan(600));
  CHECK(h.finish() == Sha3_256::digest(data));
}

TEST_CASE("canonical encoding is deterministic and empty block frame is minimal") {
  Block b = opaque("hello");
  CHECK(canonical_encode(b) == canonical_encode(b));

  Block empty = opaque("");
  Bytes enc = canonical_encode(empty);
  // tag, zero-length payload field, zero-count parent list
  CHECK(enc == Bytes{kTagOpaque, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0, 0});
}

TEST_CASE("distinct payloads encode distinctly") {
  CHECK(canonical_encode(opaque("a")) != canonical_encode(opaque("b")));
}

TEST_CASE("hash_block matches independent sha3 over the documented frame") {
  Block b = opaque("abc");
  Bytes frame = canonical_encode(b);
  Bytes expected = openssl_sha3_256(frame);
  CHECK(to_hex(hash_block(b).digest) == to_hex(expected));
  CHECK(hash_block(b) == hash_block(b));
}

TEST_CASE("no collisions over a random corpus") {
  std::mt19937_64 rng(42);
  std::set<std::string> hashes;
  std::set<Bytes> encodings;
  int n = 10000;
  for (int i = 0; i < n; ++i) {
    Block b = random_block(rng);
    encodings.insert(canonical_encode(b));
    hashes.insert(hash_block(b).hex());
  }
  // distinct encodings must hash distinctly
  CHECK(hashes.size() == encodings.size());
}

TEST_CASE("decode round-trips every variant") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 2000; ++i) {
    Block b = random_block(rng);
    Bytes enc = canonical_encode(b);
    Block back = canonical_decode(enc);
    CHECK(canonical_encode(back) == enc);
    CHECK(back == b);
  }
}

TEST_CASE("decode rejects malformed input") {
  CHECK_THROWS_AS(canonical_decode(Bytes{}), DecodeError);
  CHECK_THROWS_AS(canonical_decode(Bytes{99}), DecodeError);
  Block b = opaque("x");
  Bytes enc = canonical_encode(b);
  Bytes trailing = enc;
  trailing.push_back(0);
  CHECK_THROWS_AS(canonical_decode(trailing), DecodeError);
  Bytes truncated(enc.begin(), enc.end() - 1);
  CHECK_THROWS_AS(canonical_decode(truncated), DecodeError);
}

TEST_CASE("decode rejects unsorted sets") {
  // two availability hashes emitted in descending order
  Hash h1, h2;
  h1.digest.fill(2);
  h2.digest.fill(1);
  StoreForever a;
  a.subject = make_reference(h1, {h1, h2});
  a.issuer = KeyPair::from_seed(uint64_t{1}).id();
  a.signature = sign_payload(KeyPair::from_seed(uint64_t{1}), a);
  Bytes enc = canonical_encode(Block{a});
  // locate the two 33-byte hash elements inside the subject's availability set
  // and swap them, breaking canonical order
  Bytes h1b{static_cast<uint8_t>(HashAlgorithm::Sha3_256)};
  h1b.insert(h1b.end(), h1.digest.begin(), h1.digest.end());
  Bytes h2b{static_cast<uint8_t>(HashAlgorithm::Sha3_256)};
  h2b.insert(h2b.end(), h2.digest.begin(), h2.digest.end());
  auto it = std::search(enc.begin(), enc.end(), h2b.begin(), h2b.end());
  REQUIRE(it != enc.end());
  auto it2 = std::search(it + 1, enc.end(), h1b.begin(), h1b.end());
  REQUIRE(it2 != enc.end());
  std::swap_ranges(it, it + 33, it2);
  CHECK_THROWS_AS(canonical_decode(enc), DecodeError);
}

TEST_CASE("verify_reference accepts the minted block and rejects others") {
  Block b = opaque("payload");
  Reference ref = reference_to(b);
  CHECK(verify_reference(ref, b));
  CHECK_FALSE(verify_reference(ref, opaque("other")));

  // flipping any single digest bit must fail
  for (int bit = 0; bit < 256; ++bit) {
    Reference flipped = ref;
    flipped.hash.digest[bit / 8] ^= uint8_t(1) << (bit % 8);
    CHECK_FALSE(verify_reference(flipped, b));
  }
}

TEST_CASE("reference identity vs bundle equality") {
  Block b = opaque("block");
  Hash h = hash_block(b);
  Hash att;
  att.digest.fill(9);
  Reference bare = Reference::to(h);
  Reference bundled = make_reference(h, {att});
  CHECK(refers_same(bare, bundled));
  CHECK(bare != bundled);
  CHECK(bare == bundled.bare());
}

TEST_CASE("reference depth cap enforced") {
  Reference r = Reference::to(Hash{});
  for (int i = 0; i < kMaxReferenceDepth - 1; ++i) {
    Hash h;
    h.digest.fill(static_cast<uint8_t>(i + 1));
    r = make_reference(h, {}, {r});
  }
  CHECK(reference_depth(r) == kMaxReferenceDepth);
  Hash top;
  top.digest.fill(0xee);
  CHECK_THROWS_AS(make_reference(top, {}, {r}), std::invalid_argument);
}

TEST_CASE("sign and verify round trip") {
  KeyPair key = KeyPair::from_seed(uint64_t{7});
  Bytes payload = to_bytes("attest to this");
  Signature sig = key.sign(payload);
  CHECK(verify_signature(payload, sig));

  // different public key fails
  Signature other = sig;
  other.signer = KeyPair::from_seed(uint64_t{8}).id();
  CHECK_FALSE(verify_signature(payload, other));

  // any payload mutation fails
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Bytes mutated = payload;
    if (rng() % 2 == 0 || mutated.empty()) {
      mutated.push_back(static_cast<uint8_t>(rng()));
    } else {
      mutated[rng() % mutated.size()] ^= static_cast<uint8_t>(1 + rng() % 255);
    }
    CHECK_FALSE(verify_signature(mutated, sig));
  }
}

TEST_CASE("signed attestation payloads bind their kind") {
  KeyPair key = KeyPair::from_seed(uint64_t{11});
  ChainSlotAtt slot;
  slot.block = Reference::to(Hash{});
  slot.root = Reference::to(Hash{});
  slot.slot = 1;
  slot.parent = slot.root;
  slot.issuer = key.id();
  slot.signature = sign_payload(key, slot);
  CHECK(verify_payload(slot, slot.signature));

  // altering any signed field invalidates
  ChainSlotAtt tampered = slot;
  tampered.slot = 2;
  CHECK_FALSE(verify_payload(tampered, slot.signature));
}

TEST_CASE("attestation bundles do not change block identity") {
  Block parent = opaque("parent");
  Hash att1, att2;
  att1.digest.fill(1);
  att2.digest.fill(2);
  Block child_a = opaque("child", {make_reference(hash_block(parent), {att1})});
  Block child_b = opaque("child", {make_reference(hash_block(parent), {att2})});
  // different bundles make different blocks (identity covers content)...
  CHECK(hash_block(child_a) != hash_block(child_b));
  // ...but both references still point at the same parent
  auto refs_a = references_of(child_a);
  auto refs_b = references_of(child_b);
  REQUIRE(refs_a.size() == 1);
  REQUIRE(refs_b.size() == 1);
  CHECK(refers_same(refs_a[0], refs_b[0]));
}

TEST_CASE("outbound hashes include bundles and covered sets") {
  Hash avail, covered;
  avail.digest.fill(3);
  covered.digest.fill(4);
  Block target = opaque("t");
  StoreForever sf;
  sf.subject = make_reference(hash_block(target), {avail});
  sf.covered = {covered};
  KeyPair key = KeyPair::from_seed(uint64_t{2});
  sf.issuer = key.id();
  sf.signature = sign_payload(key, sf);
  auto hashes = outbound_hashes(Block{sf});
  auto contains = [&](const Hash& h) {
    return std::find(hashes.begin(), hashes.end(), h) != hashes.end();
  };
  CHECK(contains(hash_block(target)));
  CHECK(contains(avail));
  CHECK(contains(covered));
}
