#include "charlotte/core.hpp"

#include <algorithm>

#include "charlotte/sha3.hpp"

namespace charlotte {

bool Hash::is_zero() const {
  return std::all_of(digest.begin(), digest.end(), [](uint8_t b) { return b == 0; });
}

// ---------------------------------------------------------------------------
// Encoder / Decoder
// ---------------------------------------------------------------------------

void Encoder::u32(uint32_t v) {
  out_.push_back(static_cast<uint8_t>(v >> 24));
  out_.push_back(static_cast<uint8_t>(v >> 16));
  out_.push_back(static_cast<uint8_t>(v >> 8));
  out_.push_back(static_cast<uint8_t>(v));
}

void Encoder::u64(uint64_t v) {
  u32(static_cast<uint32_t>(v >> 32));
  u32(static_cast<uint32_t>(v));
}

void Encoder::field(BytesView b) {
  u32(static_cast<uint32_t>(b.size()));
  raw(b);
}

void Encoder::field_str(const std::string& s) {
  field(BytesView(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

uint8_t Decoder::u8() {
  if (pos_ + 1 > data_.size()) throw DecodeError("truncated u8");
  return data_[pos_++];
}

uint32_t Decoder::u32() {
  if (pos_ + 4 > data_.size()) throw DecodeError("truncated u32");
  uint32_t v = (uint32_t(data_[pos_]) << 24) | (uint32_t(data_[pos_ + 1]) << 16) |
               (uint32_t(data_[pos_ + 2]) << 8) | uint32_t(data_[pos_ + 3]);
  pos_ += 4;
  return v;
}

uint64_t Decoder::u64() {
  uint64_t hi = u32();
  return (hi << 32) | u32();
}

BytesView Decoder::field() {
  uint32_t len = u32();
  if (pos_ + len > data_.size()) throw DecodeError("truncated field");
  BytesView v = data_.subspan(pos_, len);
  pos_ += len;
  return v;
}

std::string Decoder::field_str() {
  BytesView v = field();
  return std::string(v.begin(), v.end());
}

void Decoder::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes");
}

// ---------------------------------------------------------------------------
// Per-type content encodings
// ---------------------------------------------------------------------------

namespace {

Bytes enc_hash(const Hash& h) {
  Bytes out;
  out.reserve(33);
  out.push_back(static_cast<uint8_t>(h.algorithm));
  out.insert(out.end(), h.digest.begin(), h.digest.end());
  return out;
}

Hash dec_hash(BytesView b) {
  if (b.size() != 33) throw DecodeError("bad hash length");
  if (b[0] != static_cast<uint8_t>(HashAlgorithm::Sha3_256))
    throw DecodeError("unknown hash algorithm");
  Hash h;
  std::copy(b.begin() + 1, b.end(), h.digest.begin());
  return h;
}

Bytes enc_cryptoid(const CryptoId& id) {
  Bytes out;
  out.reserve(33);
  out.push_back(static_cast<uint8_t>(id.scheme));
  out.insert(out.end(), id.public_key.begin(), id.public_key.end());
  return out;
}

CryptoId dec_cryptoid(BytesView b) {
  if (b.size() != 33) throw DecodeError("bad cryptoid length");
  if (b[0] != static_cast<uint8_t>(SignatureScheme::Ed25519))
    throw DecodeError("unknown signature scheme");
  CryptoId id;
  std::copy(b.begin() + 1, b.end(), id.public_key.begin());
  return id;
}

Bytes enc_signature(const Signature& s) {
  Encoder e;
  e.field(enc_cryptoid(s.signer));
  e.field(BytesView(s.bytes.data(), s.bytes.size()));
  return e.take();
}

Signature dec_signature(BytesView b) {
  Decoder d(b);
  Signature s;
  s.signer = dec_cryptoid(d.field());
  BytesView sig = d.field();
  if (sig.size() != 64) throw DecodeError("bad signature length");
  std::copy(sig.begin(), sig.end(), s.bytes.begin());
  d.expect_done();
  return s;
}

Bytes enc_reference(const Reference& r, int depth);

// Sorted-set field: u32 count, then each element length-prefixed, strictly
// ascending by element bytes.
template <typename T, typename EncFn>
Bytes enc_set(const std::vector<T>& xs, EncFn enc) {
  std::vector<Bytes> blobs;
  blobs.reserve(xs.size());
  for (const T& x : xs) blobs.push_back(enc(x));
  std::sort(blobs.begin(), blobs.end());
  Encoder e;
  e.u32(static_cast<uint32_t>(blobs.size()));
  for (size_t i = 0; i < blobs.size(); ++i) {
    if (i > 0 && blobs[i] == blobs[i - 1]) continue;  // dedup
    e.field(blobs[i]);
  }
  // re-emit with correct count when duplicates were dropped
  size_t unique = blobs.empty() ? 0 : 1;
  for (size_t i = 1; i < blobs.size(); ++i)
    if (blobs[i] != blobs[i - 1]) ++unique;
  if (unique != blobs.size()) {
    Encoder e2;
    e2.u32(static_cast<uint32_t>(unique));
    Bytes prev;
    bool first = true;
    for (const Bytes& b : blobs) {
      if (!first && b == prev) continue;
      e2.field(b);
      prev = b;
      first = false;
    }
    return e2.take();
  }
  return e.take();
}

// Ordered-list field: u32 count, elements in given order.
template <typename T, typename EncFn>
Bytes enc_list(const std::vector<T>& xs, EncFn enc) {
  Encoder e;
  e.u32(static_cast<uint32_t>(xs.size()));
  for (const T& x : xs) e.field(enc(x));
  return e.take();
}

std::vector<BytesView> dec_seq(BytesView b, bool sorted_set) {
  Decoder d(b);
  uint32_t n = d.u32();
  std::vector<BytesView> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    BytesView el = d.field();
    if (sorted_set && !out.empty()) {
      BytesView prev = out.back();
      bool greater = std::lexicographical_compare(prev.begin(), prev.end(),
                                                  el.begin(), el.end());
      if (!greater) throw DecodeError("set not strictly sorted");
    }
    out.push_back(el);
  }
  d.expect_done();
  return out;
}

Bytes enc_u64_field(uint64_t v) {
  Encoder e;
  e.u64(v);
  return e.take();
}

uint64_t dec_u64_field(BytesView b) {
  Decoder d(b);
  uint64_t v = d.u64();
  d.expect_done();
  return v;
}

Bytes enc_reference(const Reference& r, int depth) {
  if (depth > kMaxReferenceDepth) throw std::invalid_argument("reference too deep");
  Encoder e;
  e.field(enc_hash(r.hash));
  e.field(enc_set(r.availability_attestations, enc_hash));
  e.field(enc_set(r.integrity_attestations,
                  [&](const Reference& x) { return enc_reference(x, depth + 1); }));
  return e.take();
}

Bytes enc_reference(const Reference& r) { return enc_reference(r, 1); }

Reference dec_reference(BytesView b, int depth) {
  if (depth > kMaxReferenceDepth) throw DecodeError("reference too deep");
  Decoder d(b);
  Reference r;
  r.hash = dec_hash(d.field());
  for (BytesView el : dec_seq(d.field(), true))
    r.availability_attestations.push_back(dec_hash(el));
  for (BytesView el : dec_seq(d.field(), true))
    r.integrity_attestations.push_back(dec_reference(el, depth + 1));
  d.expect_done();
  return r;
}

Reference dec_reference(BytesView b) { return dec_reference(b, 1); }

Bytes enc_chain_slots(const std::vector<std::pair<Reference, uint64_t>>& cs) {
  return enc_set(cs, [](const std::pair<Reference, uint64_t>& p) {
    Encoder e;
    e.field(enc_reference(p.first));
    e.field(enc_u64_field(p.second));
    return e.take();
  });
}

std::vector<std::pair<Reference, uint64_t>> dec_chain_slots(BytesView b) {
  std::vector<std::pair<Reference, uint64_t>> out;
  for (BytesView el : dec_seq(b, true)) {
    Decoder d(el);
    Reference r = dec_reference(d.field());
    uint64_t slot = dec_u64_field(d.field());
    d.expect_done();
    out.emplace_back(std::move(r), slot);
  }
  return out;
}

Bytes enc_value(const HetconsValue& v) {
  Encoder e;
  e.field(enc_chain_slots(v.chain_slots));
  e.field(enc_reference(v.block));
  return e.take();
}

HetconsValue dec_value(BytesView b) {
  Decoder d(b);
  HetconsValue v;
  v.chain_slots = dec_chain_slots(d.field());
  v.block = dec_reference(d.field());
  d.expect_done();
  return v;
}

Bytes enc_ballot(const Ballot& b) {
  Encoder e;
  e.field(enc_u64_field(b.counter));
  e.field(enc_cryptoid(b.proposer));
  return e.take();
}

Ballot dec_ballot(BytesView b) {
  Decoder d(b);
  Ballot out;
  out.counter = dec_u64_field(d.field());
  out.proposer = dec_cryptoid(d.field());
  d.expect_done();
  return out;
}

Bytes enc_accepted(const std::optional<std::pair<Ballot, HetconsValue>>& a) {
  if (!a) return {};
  Encoder e;
  e.field(enc_ballot(a->first));
  e.field(enc_value(a->second));
  return e.take();
}

std::optional<std::pair<Ballot, HetconsValue>> dec_accepted(BytesView b) {
  if (b.empty()) return std::nullopt;
  Decoder d(b);
  Ballot bal = dec_ballot(d.field());
  HetconsValue v = dec_value(d.field());
  d.expect_done();
  return std::make_pair(bal, v);
}

Bytes enc_commit_body(const std::variant<Bytes, std::vector<GitCommit::Parent>>& body) {
  Encoder e;
  if (body.index() == 0) {
    e.u8(0);
    e.field(std::get<0>(body));
  } else {
    e.u8(1);
    e.field(enc_list(std::get<1>(body), [](const GitCommit::Parent& p) {
      Encoder pe;
      pe.field(enc_reference(p.commit));
      pe.field(p.diff);
      return pe.take();
    }));
  }
  return e.take();
}

std::variant<Bytes, std::vector<GitCommit::Parent>> dec_commit_body(BytesView b) {
  Decoder d(b);
  uint8_t sel = d.u8();
  if (sel == 0) {
    BytesView content = d.field();
    d.expect_done();
    return Bytes(content.begin(), content.end());
  }
  if (sel != 1) throw DecodeError("bad commit body selector");
  std::vector<GitCommit::Parent> parents;
  for (BytesView el : dec_seq(d.field(), false)) {
    Decoder pd(el);
    GitCommit::Parent p;
    p.commit = dec_reference(pd.field());
    BytesView diff = pd.field();
    p.diff.assign(diff.begin(), diff.end());
    pd.expect_done();
    parents.push_back(std::move(p));
  }
  d.expect_done();
  if (parents.empty()) throw DecodeError("parent commit list empty");
  return parents;
}

// Field blobs for each variant body, in declared order.

std::vector<Bytes> fields_of(const OpaqueData& b) {
  return {b.payload, enc_list(b.parents, [](const Reference& r) { return enc_reference(r); })};
}

std::vector<Bytes> fields_of(const TypeDescription& b) {
  return {to_bytes(b.text)};
}

std::vector<Bytes> fields_of(const StoreForever& b) {
  return {enc_reference(b.subject), enc_set(b.covered, enc_hash), enc_cryptoid(b.issuer),
          enc_signature(b.signature)};
}

std::vector<Bytes> fields_of(const ChainSlotAtt& b) {
  return {enc_reference(b.block), enc_reference(b.root), enc_u64_field(b.slot),
          enc_reference(b.parent), enc_cryptoid(b.issuer), enc_signature(b.signature)};
}

std::vector<Bytes> fields_of(const TimestampBatchAtt& b) {
  return {enc_u64_field(static_cast<uint64_t>(b.time_ms)),
          enc_list(b.subjects, [](const Reference& r) { return enc_reference(r); }),
          enc_cryptoid(b.issuer), enc_signature(b.signature)};
}

std::vector<Bytes> fields_of(const NakamotoAtt& b) {
  return {enc_reference(b.block), enc_reference(b.parent), enc_u64_field(b.nonce)};
}

std::vector<Bytes> fields_of(const GitBranchAtt& b) {
  return {enc_u64_field(static_cast<uint64_t>(b.time_ms)), to_bytes(b.branch_name),
          enc_reference(b.commit), enc_cryptoid(b.issuer), enc_signature(b.signature)};
}

std::vector<Bytes> fields_of(const HetconsMessageAtt& b) {
  Bytes phase{static_cast<uint8_t>(b.phase)};
  return {phase,
          enc_ballot(b.ballot),
          enc_value(b.value),
          enc_accepted(b.accepted),
          enc_set(b.justification, [](const Reference& r) { return enc_reference(r); }),
          enc_cryptoid(b.sender),
          enc_signature(b.signature)};
}

std::vector<Bytes> fields_of(const HetconsDecisionAtt& b) {
  return {enc_value(b.value),
          enc_set(b.quorum_2b, [](const Reference& r) { return enc_reference(r); }),
          enc_cryptoid(b.issuer), enc_signature(b.signature)};
}

std::vector<Bytes> fields_of(const GitCommit& b) {
  return {to_bytes(b.comment), enc_hash(b.content_hash), enc_commit_body(b.body),
          enc_cryptoid(b.author), enc_signature(b.signature)};
}

std::vector<Bytes> fields_of(const HetconsProposal& b) {
  return {enc_value(b.value)};
}

}  // namespace

int reference_depth(const Reference& ref) {
  int deepest = 0;
  for (const Reference& r : ref.integrity_attestations)
    deepest = std::max(deepest, reference_depth(r));
  return deepest + 1;
}

Bytes encode_reference(const Reference& ref) { return enc_reference(ref); }

Reference decode_reference_bytes(BytesView b) { return dec_reference(b); }

Bytes encode_value_bytes(const HetconsValue& v) { return enc_value(v); }

HetconsValue decode_value_bytes(BytesView b) { return dec_value(b); }

void sort_reference_set(std::vector<Reference>& refs) {
  std::sort(refs.begin(), refs.end(), [](const Reference& a, const Reference& b) {
    return enc_reference(a) < enc_reference(b);
  });
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
}

void canonicalize_value(HetconsValue& value) {
  auto enc_slot = [](const std::pair<Reference, uint64_t>& p) {
    Encoder e;
    e.field(enc_reference(p.first));
    e.field(enc_u64_field(p.second));
    return e.take();
  };
  std::sort(value.chain_slots.begin(), value.chain_slots.end(),
            [&](const auto& a, const auto& b) { return enc_slot(a) < enc_slot(b); });
  value.chain_slots.erase(std::unique(value.chain_slots.begin(), value.chain_slots.end()),
                          value.chain_slots.end());
}

void canonicalize_reference(Reference& ref) {
  for (Reference& r : ref.integrity_attestations) canonicalize_reference(r);
  std::sort(ref.availability_attestations.begin(), ref.availability_attestations.end());
  ref.availability_attestations.erase(
      std::unique(ref.availability_attestations.begin(), ref.availability_attestations.end()),
      ref.availability_attestations.end());
  sort_reference_set(ref.integrity_attestations);
}

Reference make_reference(Hash h, std::vector<Hash> availability,
                         std::vector<Reference> integrity) {
  Reference ref{h, std::move(availability), std::move(integrity)};
  canonicalize_reference(ref);
  if (reference_depth(ref) > kMaxReferenceDepth)
    throw std::invalid_argument("reference nesting exceeds depth cap");
  return ref;
}

uint8_t block_tag(const Block& b) {
  return static_cast<uint8_t>(b.index() + 1);
}

std::optional<uint8_t> block_subtag(const Block& b) {
  if (const auto* att = std::get_if<IntegrityAttestation>(&b))
    return static_cast<uint8_t>(att->index() + 1);
  return std::nullopt;
}

std::vector<Bytes> encode_fields(const Block& block) {
  return std::visit(
      [](const auto& body) -> std::vector<Bytes> {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, IntegrityAttestation>) {
          return std::visit([](const auto& att) { return fields_of(att); }, body);
        } else {
          return fields_of(body);
        }
      },
      block);
}

Bytes canonical_encode(const Block& block) {
  Encoder e;
  e.u8(block_tag(block));
  if (auto sub = block_subtag(block)) e.u8(*sub);
  for (const Bytes& f : encode_fields(block)) e.field(f);
  return e.take();
}

Block canonical_decode(BytesView bytes) {
  Decoder d(bytes);
  uint8_t tag = d.u8();
  Block out;
  switch (tag) {
    case kTagOpaque: {
      OpaqueData b;
      BytesView payload = d.field();
      b.payload.assign(payload.begin(), payload.end());
      for (BytesView el : dec_seq(d.field(), false)) b.parents.push_back(dec_reference(el));
      out = std::move(b);
      break;
    }
    case kTagTypeDescription: {
      out = TypeDescription{d.field_str()};
      break;
    }
    case kTagStoreForever: {
      StoreForever b;
      b.subject = dec_reference(d.field());
      for (BytesView el : dec_seq(d.field(), true)) b.covered.push_back(dec_hash(el));
      b.issuer = dec_cryptoid(d.field());
      b.signature = dec_signature(d.field());
      out = std::move(b);
      break;
    }
    case kTagIntegrity: {
      uint8_t sub = d.u8();
      IntegrityAttestation att;
      switch (sub) {
        case kSubtagChainSlot: {
          ChainSlotAtt a;
          a.block = dec_reference(d.field());
          a.root = dec_reference(d.field());
          a.slot = dec_u64_field(d.field());
          a.parent = dec_reference(d.field());
          a.issuer = dec_cryptoid(d.field());
          a.signature = dec_signature(d.field());
          if (a.slot < 1) throw DecodeError("chain slot must be >= 1");
          att = std::move(a);
          break;
        }
        case kSubtagTimestampBatch: {
          TimestampBatchAtt a;
          a.time_ms = static_cast<int64_t>(dec_u64_field(d.field()));
          for (BytesView el : dec_seq(d.field(), false)) a.subjects.push_back(dec_reference(el));
          a.issuer = dec_cryptoid(d.field());
          a.signature = dec_signature(d.field());
          if (a.subjects.empty()) throw DecodeError("timestamp subjects empty");
          att = std::move(a);
          break;
        }
        case kSubtagNakamoto: {
          NakamotoAtt a;
          a.block = dec_reference(d.field());
          a.parent = dec_reference(d.field());
          a.nonce = dec_u64_field(d.field());
          att = std::move(a);
          break;
        }
        case kSubtagGitBranch: {
          GitBranchAtt a;
          a.time_ms = static_cast<int64_t>(dec_u64_field(d.field()));
          a.branch_name = d.field_str();
          a.commit = dec_reference(d.field());
          a.issuer = dec_cryptoid(d.field());
          a.signature = dec_signature(d.field());
          att = std::move(a);
          break;
        }
        case kSubtagHetconsMessage: {
          HetconsMessageAtt a;
          BytesView phase = d.field();
          if (phase.size() != 1 || phase[0] < 1 || phase[0] > 4)
            throw DecodeError("bad hetcons phase");
          a.phase = static_cast<HetconsPhase>(phase[0]);
          a.ballot = dec_ballot(d.field());
          a.value = dec_value(d.field());
          a.accepted = dec_accepted(d.field());
          for (BytesView el : dec_seq(d.field(), true))
            a.justification.push_back(dec_reference(el));
          a.sender = dec_cryptoid(d.field());
          a.signature = dec_signature(d.field());
          att = std::move(a);
          break;
        }
        case kSubtagHetconsDecision: {
          HetconsDecisionAtt a;
          a.value = dec_value(d.field());
          for (BytesView el : dec_seq(d.field(), true)) a.quorum_2b.push_back(dec_reference(el));
          a.issuer = dec_cryptoid(d.field());
          a.signature = dec_signature(d.field());
          att = std::move(a);
          break;
        }
        default:
          throw DecodeError("unknown integrity attestation subtag");
      }
      out = std::move(att);
      break;
    }
    case kTagGitCommit: {
      GitCommit b;
      b.comment = d.field_str();
      b.content_hash = dec_hash(d.field());
      b.body = dec_commit_body(d.field());
      b.author = dec_cryptoid(d.field());
      b.signature = dec_signature(d.field());
      out = std::move(b);
      break;
    }
    case kTagHetconsProposal: {
      out = HetconsProposal{dec_value(d.field())};
      break;
    }
    default:
      throw DecodeError("unknown block tag");
  }
  d.expect_done();
  return out;
}

Hash hash_block(const Block& block) {
  Bytes enc = canonical_encode(block);
  Hash h;
  h.digest = Sha3_256::digest(enc);
  return h;
}

Reference reference_to(const Block& block) { return Reference::to(hash_block(block)); }

bool verify_reference(const Reference& ref, const Block& block) {
  return ref.hash == hash_block(block);
}

namespace {

struct RefCollector {
  std::vector<Reference> refs;

  void operator()(const OpaqueData& b) {
    for (const auto& r : b.parents) refs.push_back(r);
  }
  void operator()(const TypeDescription&) {}
  void operator()(const StoreForever& b) { refs.push_back(b.subject); }
  void operator()(const ChainSlotAtt& b) {
    refs.push_back(b.block);
    refs.push_back(b.root);
    refs.push_back(b.parent);
  }
  void operator()(const TimestampBatchAtt& b) {
    for (const auto& r : b.subjects) refs.push_back(r);
  }
  void operator()(const NakamotoAtt& b) {
    refs.push_back(b.block);
    refs.push_back(b.parent);
  }
  void operator()(const GitBranchAtt& b) { refs.push_back(b.commit); }
  void operator()(const HetconsMessageAtt& b) {
    for (const auto& [root, slot] : b.value.chain_slots) refs.push_back(root);
    refs.push_back(b.value.block);
    if (b.accepted) {
      for (const auto& [root, slot] : b.accepted->second.chain_slots) refs.push_back(root);
      refs.push_back(b.accepted->second.block);
    }
    for (const auto& r : b.justification) refs.push_back(r);
  }
  void operator()(const HetconsDecisionAtt& b) {
    for (const auto& [root, slot] : b.value.chain_slots) refs.push_back(root);
    refs.push_back(b.value.block);
    for (const auto& r : b.quorum_2b) refs.push_back(r);
  }
  void operator()(const GitCommit& b) {
    if (const auto* parents = std::get_if<std::vector<GitCommit::Parent>>(&b.body))
      for (const auto& p : *parents) refs.push_back(p.commit);
  }
  void operator()(const HetconsProposal& b) {
    for (const auto& [root, slot] : b.value.chain_slots) refs.push_back(root);
    refs.push_back(b.value.block);
  }
  void operator()(const IntegrityAttestation& b) {
    std::visit(*this, b);
  }
};

void hashes_of_ref(const Reference& r, std::vector<Hash>& out) {
  out.push_back(r.hash);
  for (const Hash& h : r.availability_attestations) out.push_back(h);
  for (const Reference& ir : r.integrity_attestations) hashes_of_ref(ir, out);
}

}  // namespace

std::vector<Reference> references_of(const Block& block) {
  RefCollector c;
  std::visit(c, block);
  return std::move(c.refs);
}

std::vector<Hash> outbound_hashes(const Block& block) {
  std::vector<Hash> out;
  for (const Reference& r : references_of(block)) hashes_of_ref(r, out);
  if (const auto* sf = std::get_if<StoreForever>(&block))
    for (const Hash& h : sf->covered) out.push_back(h);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Signing payloads carry a domain prefix so a signature for one attestation
// kind can never validate as another.

Bytes signing_bytes(const StoreForever& a) {
  Encoder e;
  e.u8(kTagStoreForever);
  e.field(enc_reference(a.subject));
  e.field(enc_set(a.covered, enc_hash));
  return e.take();
}

Bytes signing_bytes(const ChainSlotAtt& a) {
  Encoder e;
  e.u8(kTagIntegrity);
  e.u8(kSubtagChainSlot);
  e.field(enc_reference(a.block));
  e.field(enc_reference(a.root));
  e.field(enc_u64_field(a.slot));
  e.field(enc_reference(a.parent));
  return e.take();
}

Bytes signing_bytes(const TimestampBatchAtt& a) {
  Encoder e;
  e.u8(kTagIntegrity);
  e.u8(kSubtagTimestampBatch);
  e.field(enc_u64_field(static_cast<uint64_t>(a.time_ms)));
  e.field(enc_list(a.subjects, [](const Reference& r) { return enc_reference(r); }));
  return e.take();
}

Bytes signing_bytes(const GitBranchAtt& a) {
  Encoder e;
  e.u8(kTagIntegrity);
  e.u8(kSubtagGitBranch);
  e.field(enc_u64_field(static_cast<uint64_t>(a.time_ms)));
  e.field_str(a.branch_name);
  e.field(enc_reference(a.commit));
  return e.take();
}

Bytes signing_bytes(const HetconsMessageAtt& a) {
  Encoder e;
  e.u8(kTagIntegrity);
  e.u8(kSubtagHetconsMessage);
  Bytes phase{static_cast<uint8_t>(a.phase)};
  e.field(phase);
  e.field(enc_ballot(a.ballot));
  e.field(enc_value(a.value));
  e.field(enc_accepted(a.accepted));
  e.field(enc_set(a.justification, [](const Reference& r) { return enc_reference(r); }));
  return e.take();
}

Bytes signing_bytes(const HetconsDecisionAtt& a) {
  Encoder e;
  e.u8(kTagIntegrity);
  e.u8(kSubtagHetconsDecision);
  e.field(enc_value(a.value));
  e.field(enc_set(a.quorum_2b, [](const Reference& r) { return enc_reference(r); }));
  return e.take();
}

Bytes signing_bytes(const GitCommit& c) {
  Encoder e;
  e.u8(kTagGitCommit);
  e.field_str(c.comment);
  e.field(enc_hash(c.content_hash));
  e.field(enc_commit_body(c.body));
  return e.take();
}

}  // namespace charlotte
