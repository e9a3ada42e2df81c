#include "charlotte/fern_common.hpp"

namespace charlotte::fern {

std::set<CryptoId> availability_issuers(const Reference& ref, const BlockStore& store,
                                        const IssuerPolicy& policy) {
  std::set<CryptoId> issuers;
  for (const Hash& att_hash : ref.availability_attestations) {
    auto blk = store.get(att_hash);
    if (!blk) continue;
    const auto* att = std::get_if<StoreForever>(&*blk);
    if (!att) continue;
    if (!policy.accepts(att->issuer)) continue;
    bool covers = att->subject.hash == ref.hash ||
                  std::find(att->covered.begin(), att->covered.end(), ref.hash) !=
                      att->covered.end();
    if (!covers) continue;
    if (att->signature.signer != att->issuer) continue;
    if (!verify_payload(*att, att->signature)) continue;
    issuers.insert(att->issuer);
  }
  return issuers;
}

std::set<CryptoId> chain_slot_issuers(const Reference& ref, const Hash& root,
                                      uint64_t slot, const BlockStore& store,
                                      const IssuerPolicy& policy) {
  std::set<CryptoId> issuers;
  for (const Reference& att_ref : ref.integrity_attestations) {
    auto blk = store.get(att_ref.hash);
    if (!blk) continue;
    const auto* integ = std::get_if<IntegrityAttestation>(&*blk);
    if (!integ) continue;
    const auto* slot_att = std::get_if<ChainSlotAtt>(integ);
    if (!slot_att) continue;
    if (slot_att->block.hash != ref.hash) continue;
    if (slot_att->root.hash != root || slot_att->slot != slot) continue;
    if (!policy.accepts(slot_att->issuer)) continue;
    if (slot_att->signature.signer != slot_att->issuer) continue;
    if (!verify_payload(*slot_att, slot_att->signature)) continue;
    issuers.insert(slot_att->issuer);
  }
  return issuers;
}

}  // namespace charlotte::fern
