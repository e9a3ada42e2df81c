#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "charlotte/keys.hpp"
#include "charlotte/wilbur.hpp"

namespace charlotte::fern {

using wilbur::BlockStore;

// Threshold over an accepted issuer set.
struct IssuerPolicy {
  size_t min_count = 0;
  std::vector<CryptoId> accepted;

  bool accepts(const CryptoId& id) const {
    return std::find(accepted.begin(), accepted.end(), id) != accepted.end();
  }
};

// Distinct accepted issuers among the availability attestations bundled in a
// reference that pledge the referenced block. Evidence is self-authenticating:
// signature plus issuer-set membership, resolved against the local store.
std::set<CryptoId> availability_issuers(const Reference& ref, const BlockStore& store,
                                        const IssuerPolicy& policy);

// Distinct accepted issuers among the integrity attestations bundled in a
// reference that bind it to (root, slot) as a chain-slot attestation.
std::set<CryptoId> chain_slot_issuers(const Reference& ref, const Hash& root,
                                      uint64_t slot, const BlockStore& store,
                                      const IssuerPolicy& policy);

}  // namespace charlotte::fern
