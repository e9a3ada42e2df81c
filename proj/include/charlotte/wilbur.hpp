#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "charlotte/keys.hpp"
#include "charlotte/transport.hpp"

namespace charlotte::wilbur {

using net::NodeAddress;

// Insert-only block map keyed by content hash, with arrival listeners and an
// optional append-only journal for restarts.
class BlockStore {
 public:
  BlockStore() = default;

  // Returns true when the block is new. Arrival listeners fire outside the
  // internal lock, after the insert is visible.
  bool insert(const Block& block);

  std::optional<Block> get(const Hash& h) const;
  bool contains(const Hash& h) const;
  size_t size() const;

  std::vector<Block> scan(const std::function<bool(const Block&)>& pred) const;
  void for_each(const std::function<void(const Hash&, const Block&)>& fn) const;

  // One-shot arrival listener; fires immediately if already stored.
  void on_arrival(const Hash& h, std::function<void(const Block&)> fn);

  // Journal: replay an existing file, then append every future insert.
  void open_journal(const std::string& path);  // throws std::runtime_error
  static std::vector<Block> read_journal(const std::string& path);

 private:
  mutable std::mutex mu_;
  std::map<Hash, Block> blocks_;
  std::map<Hash, std::vector<std::function<void(const Block&)>>> waiters_;
  std::string journal_path_;
};

struct WilburConfig {
  KeyPair key;
  std::vector<NodeAddress> peers;
  int64_t wait_window_ms = 30000;  // availability requests and hash queries
  std::string journal_path;        // empty = memory only
};

// Availability server: stores blocks forever, relays fresh blocks to peers,
// issues store-forever attestations, answers hash and fill-in-the-blank
// queries.
class WilburNode : public net::NodeService {
 public:
  explicit WilburNode(WilburConfig config);

  std::string on_block(const Block& block) override;
  void on_request(net::MsgKind kind, const Bytes& body, ReplyFn reply) override;
  void on_attach(net::Runtime& rt, const NodeAddress& self) override;

  BlockStore& store() { return store_; }
  const CryptoId& issuer() const { return config_.key.id(); }

 private:
  void handle_availability(const net::AvailabilityPolicy& policy, ReplyFn reply);
  void handle_query(const net::WilburQueryInput& query, ReplyFn reply);
  net::ResponseBody issue_attestation(const net::AvailabilityPolicy& policy);
  bool store_and_relay(const Block& block);

  WilburConfig config_;
  BlockStore store_;
  net::Runtime* rt_ = nullptr;
};

}  // namespace charlotte::wilbur
