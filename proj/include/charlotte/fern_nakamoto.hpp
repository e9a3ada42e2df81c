#pragma once

#include <deque>
#include <map>

#include "charlotte/fern_common.hpp"
#include "charlotte/transport.hpp"

namespace charlotte::fern {

// Proof-of-work predicate: the hash of the attestation's own encoding has at
// least difficulty_bits leading zero bits.
bool pow_ok(const NakamotoAtt& att, uint32_t difficulty_bits);
int leading_zero_bits(const Hash& h);

// Scans nonces start, start+stride, ... until the predicate holds.
NakamotoAtt mine(const Reference& block, const Reference& parent,
                 uint32_t difficulty_bits, uint64_t start_nonce = 0,
                 uint64_t stride = 1);

// Longest valid proof-of-work path from the root; ties break toward the
// lexicographically smallest tip hash.
std::vector<NakamotoAtt> best_chain(const BlockStore& store, const Hash& root,
                                    uint32_t difficulty_bits);

struct NakamotoConfig {
  uint32_t difficulty_bits = 8;
  uint32_t confirmation_depth = 1;  // k
  IssuerPolicy required_availability;
  Reference chain_root;
  std::vector<net::NodeAddress> peers;  // other miners
  // Virtual mining: position in the disjoint nonce partition and speed.
  uint64_t miner_index = 0;
  uint64_t miner_count = 1;
  double attempts_per_ms = 1000.0;
};

// Mining fern. Requests queue per miner; the miner works on the oldest
// unconfirmed block, extending its current best tip. Completion times are
// drawn from the geometric law of the difficulty so simulated races follow
// real mining statistics; the winning nonce is found by a real scan.
class NakamotoMiner : public net::NodeService {
 public:
  explicit NakamotoMiner(NakamotoConfig config);

  std::string on_block(const Block& block) override;
  void on_request(net::MsgKind kind, const Bytes& body, ReplyFn reply) override;
  void on_attach(net::Runtime& rt, const net::NodeAddress& self) override;

  BlockStore& store() { return store_; }
  Hash tip() const { return tip_; }

 private:
  void consider_attestation(const Block& block);
  void start_mining();
  void finish_mining(uint64_t generation);
  void check_pending_replies();
  uint64_t chain_height(const Hash& block_hash) const;

  NakamotoConfig config_;
  BlockStore store_;
  net::Runtime* rt_ = nullptr;

  Hash tip_;                 // hash of the attested block at the best tip
  uint64_t tip_height_ = 0;  // blocks above the root
  std::map<Hash, std::pair<Hash, uint64_t>> height_index_;  // block -> (parent block, height)

  struct PendingRequest {
    Reference block;
    ReplyFn reply;
  };
  std::deque<PendingRequest> queue_;
  std::map<Hash, std::vector<ReplyFn>> awaiting_depth_;  // block -> replies

  bool mining_ = false;
  uint64_t mining_generation_ = 0;
  Hash mining_block_;
  Hash mining_parent_;
};

}  // namespace charlotte::fern
