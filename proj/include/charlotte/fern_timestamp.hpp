#pragma once

#include <map>

#include "charlotte/fern_common.hpp"
#include "charlotte/transport.hpp"

namespace charlotte::fern {

struct TimestampConfig {
  KeyPair key;
  size_t batch_size = 100;
  std::vector<net::NodeAddress> peer_ferns;
  // Flush a partial batch after this long without reaching batch_size.
  // 0 disables idle flushing.
  int64_t max_batch_delay_ms = 0;
};

// Timestamping fern: stamps any requested references immediately, batches
// every batch_size issued stamps into a block it submits to its peers, so
// stamps entangle across servers.
class TimestampFern : public net::NodeService {
 public:
  explicit TimestampFern(TimestampConfig config);

  std::string on_block(const Block& block) override;
  void on_request(net::MsgKind kind, const Bytes& body, ReplyFn reply) override;
  void on_attach(net::Runtime& rt, const net::NodeAddress& self) override;

  BlockStore& store() { return store_; }
  const CryptoId& issuer() const { return config_.key.id(); }
  size_t stamps_issued() const { return stamps_issued_; }

  // Issue the pending batch now, if any. The experiment drain uses this.
  void flush_batch();

 private:
  Reference issue(const std::vector<Reference>& subjects);
  void arm_flush_timer();

  TimestampConfig config_;
  BlockStore store_;
  net::Runtime* rt_ = nullptr;
  std::vector<Reference> pending_batch_;  // refs to attestations since last batch
  size_t stamps_issued_ = 0;
  uint64_t flush_timer_ = 0;
  bool flush_armed_ = false;
};

// Earliest time each issuer's stamps cover `target`, transitively: an
// attestation covers everything reachable from it through references.
std::map<CryptoId, int64_t> stamp_coverage(const Hash& target, const BlockStore& store);

}  // namespace charlotte::fern
