#pragma once

#include <array>
#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "charlotte/bytes.hpp"

namespace charlotte {

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

enum class HashAlgorithm : uint8_t { Sha3_256 = 1 };

struct Hash {
  HashAlgorithm algorithm = HashAlgorithm::Sha3_256;
  std::array<uint8_t, 32> digest{};

  auto operator<=>(const Hash&) const = default;
  std::string hex() const { return to_hex(digest); }
  bool is_zero() const;
};

enum class SignatureScheme : uint8_t { Ed25519 = 1 };

struct CryptoId {
  SignatureScheme scheme = SignatureScheme::Ed25519;
  std::array<uint8_t, 32> public_key{};

  auto operator<=>(const CryptoId&) const = default;
  std::string short_hex() const { return to_hex(public_key).substr(0, 8); }
};

struct Signature {
  CryptoId signer;
  std::array<uint8_t, 64> bytes{};

  auto operator<=>(const Signature&) const = default;
};

// ---------------------------------------------------------------------------
// References
// ---------------------------------------------------------------------------

// A reference names a block by hash and may bundle evidence: hashes of
// availability attestations and references to integrity attestations.
// The bundle never affects which block is referenced; use refers_same()
// for identity and operator== for full bundle equality.
struct Reference {
  Hash hash;
  std::vector<Hash> availability_attestations;       // sorted, unique
  std::vector<Reference> integrity_attestations;     // sorted, unique

  bool operator==(const Reference& o) const;
  std::strong_ordering operator<=>(const Reference& o) const;

  static Reference to(const Hash& h) { return Reference{h, {}, {}}; }
  Reference bare() const { return Reference{hash, {}, {}}; }
};

inline std::strong_ordering Reference::operator<=>(const Reference& o) const {
  if (auto c = hash <=> o.hash; c != 0) return c;
  if (auto c = std::lexicographical_compare_three_way(
          availability_attestations.begin(), availability_attestations.end(),
          o.availability_attestations.begin(), o.availability_attestations.end());
      c != 0)
    return c;
  return std::lexicographical_compare_three_way(
      integrity_attestations.begin(), integrity_attestations.end(),
      o.integrity_attestations.begin(), o.integrity_attestations.end());
}

inline bool Reference::operator==(const Reference& o) const {
  return (*this <=> o) == 0;
}

inline bool refers_same(const Reference& a, const Reference& b) {
  return a.hash == b.hash;
}

constexpr int kMaxReferenceDepth = 8;

// Nesting depth of the integrity bundle; a bare reference has depth 1.
int reference_depth(const Reference& ref);

// Canonical (encoded-bytes) ordering helpers. Set-valued fields are kept in
// this order both in memory and on the wire.
Bytes encode_reference(const Reference& ref);
Reference decode_reference_bytes(BytesView b);  // throws DecodeError
void sort_reference_set(std::vector<Reference>& refs);

// Sorts and dedups bundle sets recursively; throws std::invalid_argument
// if the depth cap is exceeded.
Reference make_reference(Hash h, std::vector<Hash> availability = {},
                         std::vector<Reference> integrity = {});
void canonicalize_reference(Reference& ref);

// ---------------------------------------------------------------------------
// Block variants
// ---------------------------------------------------------------------------

// General data block: opaque payload plus ordered parent references.
struct OpaqueData {
  Bytes payload;
  std::vector<Reference> parents;

  bool operator==(const OpaqueData&) const = default;
};

// Inert description of an application type; carried but never interpreted.
struct TypeDescription {
  std::string text;

  bool operator==(const TypeDescription&) const = default;
};

// Availability attestation: the issuer pledges to store the subject (and
// every hash in covered) forever. Signed over (subject, covered).
struct StoreForever {
  Reference subject;            // bare hash; bundles are stripped by issuers
  std::vector<Hash> covered;    // sorted, unique
  CryptoId issuer;
  Signature signature;

  bool operator==(const StoreForever&) const = default;
};

// --- integrity attestation payloads ---

// Exclusive binding of a block to (root, slot) on an agreement chain.
// Signed over (block, root, slot, parent).
struct ChainSlotAtt {
  Reference block;
  Reference root;
  uint64_t slot = 0;  // 1-based; slot 1 has parent == root
  Reference parent;
  CryptoId issuer;
  Signature signature;

  bool operator==(const ChainSlotAtt&) const = default;
};

// Signed claim that the subjects were seen at or before `time_ms`.
struct TimestampBatchAtt {
  int64_t time_ms = 0;
  std::vector<Reference> subjects;  // nonempty, order as requested
  CryptoId issuer;
  Signature signature;

  bool operator==(const TimestampBatchAtt&) const = default;
};

// Proof-of-work link: valid when the hash of its own encoding clears the
// chain's difficulty. Unsigned; the work is the authentication.
struct NakamotoAtt {
  Reference block;
  Reference parent;
  uint64_t nonce = 0;

  bool operator==(const NakamotoAtt&) const = default;
};

// Branch head declaration for the git simulation.
struct GitBranchAtt {
  int64_t time_ms = 0;
  std::string branch_name;
  Reference commit;
  CryptoId issuer;
  Signature signature;

  bool operator==(const GitBranchAtt&) const = default;
};

// --- hetcons messages (consensus messages are blocks) ---

enum class HetconsPhase : uint8_t { OneA = 1, OneB = 2, TwoA = 3, TwoB = 4 };

struct Ballot {
  uint64_t counter = 0;
  CryptoId proposer;

  auto operator<=>(const Ballot&) const = default;
};

// The value under agreement: one block bound to one slot on each listed chain.
struct HetconsValue {
  std::vector<std::pair<Reference, uint64_t>> chain_slots;  // canonical set order
  Reference block;

  bool operator==(const HetconsValue&) const = default;
};

void canonicalize_value(HetconsValue& value);
Bytes encode_value_bytes(const HetconsValue& v);
HetconsValue decode_value_bytes(BytesView b);

struct HetconsMessageAtt {
  HetconsPhase phase = HetconsPhase::OneA;
  Ballot ballot;
  HetconsValue value;
  // OneB: sender's highest accepted (ballot, value), if any.
  std::optional<std::pair<Ballot, HetconsValue>> accepted;
  std::vector<Reference> justification;  // prior messages backing this phase
  CryptoId sender;
  Signature signature;

  bool operator==(const HetconsMessageAtt&) const = default;
};

struct HetconsDecisionAtt {
  HetconsValue value;
  std::vector<Reference> quorum_2b;  // one full quorum of TwoB messages per chain
  CryptoId issuer;
  Signature signature;

  bool operator==(const HetconsDecisionAtt&) const = default;
};

using IntegrityAttestation =
    std::variant<ChainSlotAtt, TimestampBatchAtt, NakamotoAtt, GitBranchAtt,
                 HetconsMessageAtt, HetconsDecisionAtt>;

// Version-control commit. Initial commits carry full content; others carry
// (parent, diff) pairs. Signed over all content fields.
struct GitCommit {
  struct Parent {
    Reference commit;
    Bytes diff;

    bool operator==(const Parent&) const = default;
  };

  std::string comment;
  Hash content_hash;
  std::variant<Bytes, std::vector<Parent>> body;  // initial contents | parents
  CryptoId author;
  Signature signature;

  bool operator==(const GitCommit&) const = default;
  bool is_initial() const { return body.index() == 0; }
};

// Proposal payload submitted to hetcons ferns.
struct HetconsProposal {
  HetconsValue value;

  bool operator==(const HetconsProposal&) const = default;
};

using Block = std::variant<OpaqueData, TypeDescription, StoreForever,
                           IntegrityAttestation, GitCommit, HetconsProposal>;

// Wire tags, fixed by the frame format doc.
enum : uint8_t {
  kTagOpaque = 1,
  kTagTypeDescription = 2,
  kTagStoreForever = 3,
  kTagIntegrity = 4,
  kTagGitCommit = 5,
  kTagHetconsProposal = 6,
};
enum : uint8_t {
  kSubtagChainSlot = 1,
  kSubtagTimestampBatch = 2,
  kSubtagNakamoto = 3,
  kSubtagGitBranch = 4,
  kSubtagHetconsMessage = 5,
  kSubtagHetconsDecision = 6,
};

uint8_t block_tag(const Block& b);
std::optional<uint8_t> block_subtag(const Block& b);

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Canonical encoding & hashing
// ---------------------------------------------------------------------------

// Frame: 1 tag byte, then each field as a 4-byte big-endian length prefix
// followed by the field bytes, in declared order. Set-valued fields are
// sorted ascending bytewise. decode rejects any non-canonical input.
Bytes canonical_encode(const Block& block);
Block canonical_decode(BytesView bytes);  // throws DecodeError

// The length-prefixed field payloads of the (sub)variant body, in declared
// order. Used for fill-in-the-blank pattern matching.
std::vector<Bytes> encode_fields(const Block& block);

Hash hash_block(const Block& block);
Reference reference_to(const Block& block);  // bare reference

bool verify_reference(const Reference& ref, const Block& block);

// Top-level references embedded in the block's own fields, in declared order.
std::vector<Reference> references_of(const Block& block);

// Every hash the block points at, including bundle attestation hashes and
// covered sets. Drives relays and coverage walks. Sorted, unique.
std::vector<Hash> outbound_hashes(const Block& block);

// Encodings of the signed portion of each signed payload.
Bytes signing_bytes(const StoreForever& a);
Bytes signing_bytes(const ChainSlotAtt& a);
Bytes signing_bytes(const TimestampBatchAtt& a);
Bytes signing_bytes(const GitBranchAtt& a);
Bytes signing_bytes(const HetconsMessageAtt& a);
Bytes signing_bytes(const HetconsDecisionAtt& a);
Bytes signing_bytes(const GitCommit& c);

// Encoding helpers shared with the transport layer.
class Encoder {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void raw(BytesView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  // 4-byte length prefix + bytes
  void field(BytesView b);
  void field_str(const std::string& s);

  Bytes take() { return std::move(out_); }
  const Bytes& peek() const { return out_; }

 private:
  Bytes out_;
};

class Decoder {
 public:
  explicit Decoder(BytesView data) : data_(data) {}

  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  int64_t i64() { return static_cast<int64_t>(u64()); }
  BytesView field();  // 4-byte length prefix + bytes
  std::string field_str();
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const;
  size_t remaining() const { return data_.size() - pos_; }

 private:
  BytesView data_;
  size_t pos_ = 0;
};

}  // namespace charlotte
