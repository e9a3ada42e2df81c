#pragma once

#include <map>
#include <mutex>
#include <optional>

#include "charlotte/fern_common.hpp"
#include "charlotte/transport.hpp"

namespace charlotte::fern {

// Write-once map (root, slot) -> first attested block hash. The journal is
// appended before any response leaves, so a restarted fern cannot equivocate.
class SlotLedger {
 public:
  std::optional<Hash> get(const Hash& root, uint64_t slot) const;

  // Atomic check-and-set; returns the winning hash (the existing one on
  // conflict, `block` when the write landed).
  Hash put_if_absent(const Hash& root, uint64_t slot, const Hash& block);

  void open_journal(const std::string& path);
  size_t size() const;

 private:
  using Key = std::pair<Hash, uint64_t>;
  mutable std::mutex mu_;
  std::map<Key, Hash> slots_;
  std::string journal_path_;
};

struct AgreementConfig {
  KeyPair key;
  IssuerPolicy required_parent_integrity;
  IssuerPolicy required_block_availability;
  // With no availability requirement the fern stands in for storage itself
  // and insists on holding the block before attesting.
  bool require_block_when_no_availability = true;
  std::string ledger_journal_path;
};

// Agreement fern: exclusive signed (root, slot) -> block bindings with
// configurable preconditions on parent integrity and block availability.
class AgreementFern : public net::NodeService {
 public:
  explicit AgreementFern(AgreementConfig config);

  std::string on_block(const Block& block) override;
  void on_request(net::MsgKind kind, const Bytes& body, ReplyFn reply) override;
  void on_attach(net::Runtime& rt, const net::NodeAddress& self) override;

  BlockStore& store() { return store_; }
  SlotLedger& ledger() { return ledger_; }
  const CryptoId& issuer() const { return config_.key.id(); }

 private:
  net::ResponseBody handle(const net::ChainSlotRequest& request);

  AgreementConfig config_;
  BlockStore store_;
  SlotLedger ledger_;
  net::Runtime* rt_ = nullptr;
};

}  // namespace charlotte::fern
