#include "charlotte/wilbur.hpp"

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace charlotte::wilbur {

using net::MsgKind;
using net::ResponseBody;

bool BlockStore::insert(const Block& block) {
  Hash h = hash_block(block);
  std::vector<std::function<void(const Block&)>> to_fire;
  {
    std::lock_guard lock(mu_);
    auto [it, fresh] = blocks_.emplace(h, block);
    if (!fresh) return false;
    if (!journal_path_.empty()) {
      std::ofstream out(journal_path_, std::ios::binary | std::ios::app);
      Bytes enc = canonical_encode(block);
      uint32_t len = static_cast<uint32_t>(enc.size());
      uint8_t hdr[4] = {static_cast<uint8_t>(len >> 24), static_cast<uint8_t>(len >> 16),
                        static_cast<uint8_t>(len >> 8), static_cast<uint8_t>(len)};
      out.write(reinterpret_cast<const char*>(hdr), 4);
      out.write(reinterpret_cast<const char*>(enc.data()), enc.size());
    }
    auto w = waiters_.find(h);
    if (w != waiters_.end()) {
      to_fire = std::move(w->second);
      waiters_.erase(w);
    }
  }
  for (auto& fn : to_fire) fn(block);
  return true;
}

std::optional<Block> BlockStore::get(const Hash& h) const {
  std::lock_guard lock(mu_);
  auto it = blocks_.find(h);
  if (it == blocks_.end()) return std::nullopt;
  return it->second;
}

bool BlockStore::contains(const Hash& h) const {
  std::lock_guard lock(mu_);
  return blocks_.count(h) != 0;
}

size_t BlockStore::size() const {
  std::lock_guard lock(mu_);
  return blocks_.size();
}

std::vector<Block> BlockStore::scan(const std::function<bool(const Block&)>& pred) const {
  std::lock_guard lock(mu_);
  std::vector<Block> out;
  for (const auto& [h, b] : blocks_)
    if (pred(b)) out.push_back(b);
  return out;
}

void BlockStore::for_each(const std::function<void(const Hash&, const Block&)>& fn) const {
  std::lock_guard lock(mu_);
  for (const auto& [h, b] : blocks_) fn(h, b);
}

void BlockStore::on_arrival(const Hash& h, std::function<void(const Block&)> fn) {
  std::optional<Block> present;
  {
    std::lock_guard lock(mu_);
    auto it = blocks_.find(h);
    if (it != blocks_.end())
      present = it->second;
    else
      waiters_[h].push_back(std::move(fn));
  }
  if (present) fn(*present);
}

void BlockStore::open_journal(const std::string& path) {
  for (const Block& b : read_journal(path)) insert(b);
  std::lock_guard lock(mu_);
  journal_path_ = path;
}

std::vector<Block> BlockStore::read_journal(const std::string& path) {
  std::vector<Block> out;
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return out;
  while (true) {
    uint8_t hdr[4];
    if (!in.read(reinterpret_cast<char*>(hdr), 4)) break;
    uint32_t len = (uint32_t(hdr[0]) << 24) | (uint32_t(hdr[1]) << 16) |
                   (uint32_t(hdr[2]) << 8) | uint32_t(hdr[3]);
    Bytes enc(len);
    if (!in.read(reinterpret_cast<char*>(enc.data()), len))
      throw std::runtime_error("truncated journal: " + path);
    out.push_back(canonical_decode(enc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// WilburNode
// ---------------------------------------------------------------------------

WilburNode::WilburNode(WilburConfig config) : config_(std::move(config)) {
  if (!config_.journal_path.empty()) store_.open_journal(config_.journal_path);
}

void WilburNode::on_attach(net::Runtime& rt, const NodeAddress&) { rt_ = &rt; }

bool WilburNode::store_and_relay(const Block& block) {
  bool fresh = store_.insert(block);
  if (fresh && rt_) {
    for (const NodeAddress& peer : config_.peers)
      rt_->send_blocks(peer, {block}, nullptr);
  }
  return fresh;
}

std::string WilburNode::on_block(const Block& block) {
  store_and_relay(block);
  return {};
}

void WilburNode::on_request(MsgKind kind, const Bytes& body, ReplyFn reply) {
  try {
    switch (kind) {
      case MsgKind::ReqAvail:
        handle_availability(net::decode_availability_policy(body), reply);
        return;
      case MsgKind::WilburQuery:
        handle_query(net::decode_wilbur_query(body), reply);
        return;
      default:
        reply(ResponseBody::failure("unsupported request kind"));
        return;
    }
  } catch (const DecodeError& e) {
    reply(ResponseBody::failure(std::string("bad request: ") + e.what()));
  }
}

ResponseBody WilburNode::issue_attestation(const net::AvailabilityPolicy& policy) {
  StoreForever att;
  att.subject = policy.subjects.front().bare();
  std::set<Hash> covered;
  for (size_t i = 1; i < policy.subjects.size(); ++i)
    covered.insert(policy.subjects[i].hash);
  if (policy.cover_referenced_attestations) {
    // pledge the attestations referenced inside each subject, when held
    for (const Reference& subject : policy.subjects) {
      std::optional<Block> blk = store_.get(subject.hash);
      if (!blk) continue;
      for (const Hash& h : outbound_hashes(*blk))
        if (store_.contains(h)) covered.insert(h);
    }
  }
  covered.erase(att.subject.hash);
  att.covered.assign(covered.begin(), covered.end());
  att.issuer = config_.key.id();
  att.signature = sign_payload(config_.key, att);

  Block att_block{att};
  store_and_relay(att_block);
  return ResponseBody::success_ref(reference_to(att_block));
}

void WilburNode::handle_availability(const net::AvailabilityPolicy& policy, ReplyFn reply) {
  std::vector<Hash> missing;
  for (const Reference& r : policy.subjects)
    if (!store_.contains(r.hash)) missing.push_back(r.hash);

  if (missing.empty()) {
    reply(issue_attestation(policy));
    return;
  }
  if (!rt_ || config_.wait_window_ms <= 0) {
    std::ostringstream os;
    os << "missing subjects:";
    for (const Hash& h : missing) os << " " << h.hex();
    reply(ResponseBody::failure(os.str()));
    return;
  }

  struct Pending {
    bool done = false;
    size_t waiting;
    net::AvailabilityPolicy policy;
    ReplyFn reply;
    uint64_t timer = 0;
  };
  auto pending = std::make_shared<Pending>();
  pending->waiting = missing.size();
  pending->policy = policy;
  pending->reply = reply;
  pending->timer = rt_->schedule(config_.wait_window_ms, [this, pending] {
    if (pending->done) return;
    pending->done = true;
    std::ostringstream os;
    os << "timed out waiting for subjects:";
    for (const Reference& r : pending->policy.subjects)
      if (!store_.contains(r.hash)) os << " " << r.hash.hex();
    pending->reply(ResponseBody::failure(os.str()));
  });
  for (const Hash& h : missing) {
    store_.on_arrival(h, [this, pending](const Block&) {
      if (pending->done) return;
      if (--pending->waiting > 0) return;
      pending->done = true;
      rt_->cancel(pending->timer);
      pending->reply(issue_attestation(pending->policy));
    });
  }
}

void WilburNode::handle_query(const net::WilburQueryInput& query, ReplyFn reply) {
  if (const auto* pattern = std::get_if<net::BlockPattern>(&query)) {
    ResponseBody resp;
    resp.blocks = store_.scan(
        [&](const Block& b) { return net::pattern_matches(*pattern, b); });
    reply(std::move(resp));
    return;
  }
  const Hash& h = std::get<Hash>(query);
  if (auto blk = store_.get(h)) {
    ResponseBody resp;
    resp.blocks.push_back(std::move(*blk));
    reply(std::move(resp));
    return;
  }
  if (!rt_ || config_.wait_window_ms <= 0) {
    reply(ResponseBody::failure("unknown block " + h.hex()));
    return;
  }
  auto done = std::make_shared<bool>(false);
  auto timer = std::make_shared<uint64_t>(0);
  *timer = rt_->schedule(config_.wait_window_ms, [reply, done, h] {
    if (*done) return;
    *done = true;
    reply(ResponseBody::failure("timed out waiting for block " + h.hex()));
  });
  store_.on_arrival(h, [this, reply, done, timer](const Block& b) {
    if (*done) return;
    *done = true;
    rt_->cancel(*timer);
    ResponseBody resp;
    resp.blocks.push_back(b);
    reply(std::move(resp));
  });
}

}  // namespace charlotte::wilbur
