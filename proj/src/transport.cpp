#include "charlotte/transport.hpp"

namespace charlotte::net {

bool pattern_matches(const BlockPattern& pattern, const Block& block) {
  if (pattern.tag != block_tag(block)) return false;
  if (pattern.subtag != block_subtag(block)) return false;
  std::vector<Bytes> fields = encode_fields(block);
  for (const auto& [index, expected] : pattern.fields) {
    if (index >= fields.size()) return false;
    if (fields[index] != expected) return false;
  }
  return true;
}

Bytes encode_availability_policy(const AvailabilityPolicy& p) {
  Encoder e;
  Encoder subjects;
  subjects.u32(static_cast<uint32_t>(p.subjects.size()));
  for (const Reference& r : p.subjects) subjects.field(encode_reference(r));
  e.field(subjects.peek());
  e.u8(p.cover_referenced_attestations ? 1 : 0);
  return e.take();
}

AvailabilityPolicy decode_availability_policy(BytesView b) {
  Decoder d(b);
  AvailabilityPolicy p;
  Decoder subj(d.field());
  uint32_t n = subj.u32();
  for (uint32_t i = 0; i < n; ++i) p.subjects.push_back(decode_reference_bytes(subj.field()));
  subj.expect_done();
  p.cover_referenced_attestations = d.u8() != 0;
  d.expect_done();
  if (p.subjects.empty()) throw DecodeError("availability policy needs subjects");
  return p;
}

namespace {

enum : uint8_t {
  kPolicyChainSlot = 1,
  kPolicyTimestamp = 2,
  kPolicyNakamoto = 3,
  kPolicyGitBranch = 4,
  kPolicyHetcons = 5,
};

Bytes enc_ref_list(const std::vector<Reference>& refs) {
  Encoder e;
  e.u32(static_cast<uint32_t>(refs.size()));
  for (const Reference& r : refs) e.field(encode_reference(r));
  return e.take();
}

std::vector<Reference> dec_ref_list(BytesView b) {
  Decoder d(b);
  uint32_t n = d.u32();
  std::vector<Reference> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) out.push_back(decode_reference_bytes(d.field()));
  d.expect_done();
  return out;
}

}  // namespace

Bytes encode_integrity_policy(const IntegrityPolicy& p) {
  Encoder e;
  std::visit(
      [&](const auto& req) {
        using T = std::decay_t<decltype(req)>;
        if constexpr (std::is_same_v<T, ChainSlotRequest>) {
          e.u8(kPolicyChainSlot);
          e.field(encode_reference(req.block));
          e.field(encode_reference(req.root));
          e.u64(req.slot);
          e.field(encode_reference(req.parent));
        } else if constexpr (std::is_same_v<T, TimestampRequest>) {
          e.u8(kPolicyTimestamp);
          e.field(enc_ref_list(req.subjects));
        } else if constexpr (std::is_same_v<T, NakamotoRequest>) {
          e.u8(kPolicyNakamoto);
          e.field(encode_reference(req.block));
        } else if constexpr (std::is_same_v<T, GitBranchRequest>) {
          e.u8(kPolicyGitBranch);
          e.field_str(req.branch_name);
          e.field(encode_reference(req.commit));
        } else {
          e.u8(kPolicyHetcons);
          e.field(encode_value_bytes(req.value));
        }
      },
      p);
  return e.take();
}

IntegrityPolicy decode_integrity_policy(BytesView b) {
  Decoder d(b);
  uint8_t tag = d.u8();
  IntegrityPolicy out;
  switch (tag) {
    case kPolicyChainSlot: {
      ChainSlotRequest r;
      r.block = decode_reference_bytes(d.field());
      r.root = decode_reference_bytes(d.field());
      r.slot = d.u64();
      r.parent = decode_reference_bytes(d.field());
      out = std::move(r);
      break;
    }
    case kPolicyTimestamp: {
      TimestampRequest r;
      r.subjects = dec_ref_list(d.field());
      out = std::move(r);
      break;
    }
    case kPolicyNakamoto: {
      NakamotoRequest r;
      r.block = decode_reference_bytes(d.field());
      out = std::move(r);
      break;
    }
    case kPolicyGitBranch: {
      GitBranchRequest r;
      r.branch_name = d.field_str();
      r.commit = decode_reference_bytes(d.field());
      out = std::move(r);
      break;
    }
    case kPolicyHetcons: {
      HetconsRequest r;
      r.value = decode_value_bytes(d.field());
      out = std::move(r);
      break;
    }
    default:
      throw DecodeError("unknown integrity policy tag");
  }
  d.expect_done();
  return out;
}

Bytes encode_wilbur_query(const WilburQueryInput& q) {
  Encoder e;
  if (const Hash* h = std::get_if<Hash>(&q)) {
    e.u8(1);
    e.u8(static_cast<uint8_t>(h->algorithm));
    e.raw(BytesView(h->digest.data(), h->digest.size()));
  } else {
    const BlockPattern& p = std::get<BlockPattern>(q);
    e.u8(2);
    e.u8(p.tag);
    e.u8(p.subtag ? 1 : 0);
    if (p.subtag) e.u8(*p.subtag);
    e.u32(static_cast<uint32_t>(p.fields.size()));
    for (const auto& [index, payload] : p.fields) {
      e.u32(index);
      e.field(payload);
    }
  }
  return e.take();
}

WilburQueryInput decode_wilbur_query(BytesView b) {
  Decoder d(b);
  uint8_t sel = d.u8();
  if (sel == 1) {
    Hash h;
    if (d.u8() != static_cast<uint8_t>(HashAlgorithm::Sha3_256))
      throw DecodeError("unknown hash algorithm");
    if (d.remaining() != 32) throw DecodeError("bad hash digest length");
    for (auto& byte : h.digest) byte = d.u8();
    return h;
  }
  if (sel != 2) throw DecodeError("unknown wilbur query selector");
  BlockPattern p;
  p.tag = d.u8();
  if (d.u8() != 0) p.subtag = d.u8();
  uint32_t n = d.u32();
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t index = d.u32();
    BytesView payload = d.field();
    p.fields.emplace_back(index, Bytes(payload.begin(), payload.end()));
  }
  d.expect_done();
  return p;
}

Bytes encode_response(const ResponseBody& r) {
  Encoder e;
  e.field_str(r.error);
  e.u32(r.offset);
  if (r.reference) {
    e.u8(1);
    e.field(encode_reference(*r.reference));
  } else {
    e.u8(0);
  }
  e.u32(static_cast<uint32_t>(r.blocks.size()));
  for (const Block& blk : r.blocks) e.field(canonical_encode(blk));
  return e.take();
}

ResponseBody decode_response(BytesView b) {
  Decoder d(b);
  ResponseBody r;
  r.error = d.field_str();
  r.offset = d.u32();
  if (d.u8() != 0) r.reference = decode_reference_bytes(d.field());
  uint32_t n = d.u32();
  for (uint32_t i = 0; i < n; ++i) r.blocks.push_back(canonical_decode(d.field()));
  d.expect_done();
  return r;
}

Bytes encode_block_chunk(const BlockChunk& c) {
  Encoder e;
  e.u32(c.offset);
  e.u8(c.last ? 1 : 0);
  e.field(c.block_bytes);
  return e.take();
}

BlockChunk decode_block_chunk(BytesView b) {
  Decoder d(b);
  BlockChunk c;
  c.offset = d.u32();
  c.last = d.u8() != 0;
  BytesView payload = d.field();
  c.block_bytes.assign(payload.begin(), payload.end());
  d.expect_done();
  return c;
}

Bytes encode_frame(MsgKind kind, uint64_t correlation, BytesView payload) {
  Encoder e;
  e.u8(static_cast<uint8_t>(kind));
  e.u64(correlation);
  e.u32(static_cast<uint32_t>(payload.size()));
  e.raw(payload);
  return e.take();
}

}  // namespace charlotte::net
