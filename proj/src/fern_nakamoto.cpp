#include "charlotte/fern_nakamoto.hpp"

#include <cmath>

#include "charlotte/sha3.hpp"

namespace charlotte::fern {

using net::MsgKind;
using net::ResponseBody;

int leading_zero_bits(const Hash& h) {
  int bits = 0;
  for (uint8_t byte : h.digest) {
    if (byte == 0) {
      bits += 8;
      continue;
    }
    for (int i = 7; i >= 0; --i) {
      if (byte & (1u << i)) return bits;
      ++bits;
    }
  }
  return bits;
}

bool pow_ok(const NakamotoAtt& att, uint32_t difficulty_bits) {
  return leading_zero_bits(hash_block(Block{IntegrityAttestation{att}})) >=
         static_cast<int>(difficulty_bits);
}

NakamotoAtt mine(const Reference& block, const Reference& parent,
                 uint32_t difficulty_bits, uint64_t start_nonce, uint64_t stride) {
  NakamotoAtt att;
  att.block = block;
  att.parent = parent;
  att.nonce = start_nonce;

  // the nonce is the final field; reuse the absorbed prefix across attempts
  Bytes full = canonical_encode(Block{IntegrityAttestation{att}});
  size_t prefix_len = full.size() - 12;  // 4-byte length + 8-byte nonce
  Sha3_256 prefix;
  prefix.update(full.data(), prefix_len);

  if (stride == 0) stride = 1;
  for (uint64_t nonce = start_nonce;; nonce += stride) {
    Sha3_256 h = prefix;
    uint8_t tail[12] = {0, 0, 0, 8,
                        static_cast<uint8_t>(nonce >> 56), static_cast<uint8_t>(nonce >> 48),
                        static_cast<uint8_t>(nonce >> 40), static_cast<uint8_t>(nonce >> 32),
                        static_cast<uint8_t>(nonce >> 24), static_cast<uint8_t>(nonce >> 16),
                        static_cast<uint8_t>(nonce >> 8),  static_cast<uint8_t>(nonce)};
    h.update(tail, sizeof tail);
    Hash digest;
    digest.digest = h.finish();
    if (leading_zero_bits(digest) >= static_cast<int>(difficulty_bits)) {
      att.nonce = nonce;
      return att;
    }
  }
}

std::vector<NakamotoAtt> best_chain(const BlockStore& store, const Hash& root,
                                    uint32_t difficulty_bits) {
  std::map<Hash, NakamotoAtt> atts;          // attestation hash -> attestation
  std::map<Hash, std::vector<Hash>> children;  // parent hash -> attestation hashes
  store.for_each([&](const Hash& h, const Block& b) {
    const auto* integ = std::get_if<IntegrityAttestation>(&b);
    if (!integ) return;
    const auto* pow = std::get_if<NakamotoAtt>(integ);
    if (!pow) return;
    if (!pow_ok(*pow, difficulty_bits)) return;
    atts.emplace(h, *pow);
    children[pow->parent.hash].push_back(h);
  });
  for (auto& [parent, kids] : children) std::sort(kids.begin(), kids.end());

  // longest path, smallest tip hash on ties
  struct Best {
    size_t length = 0;
    Hash tip;
    std::vector<Hash> path;
  };
  std::function<Best(const Hash&)> longest = [&](const Hash& from) -> Best {
    Best best;
    best.tip = from;
    auto it = children.find(from);
    if (it == children.end()) return best;
    for (const Hash& kid : it->second) {
      Best sub = longest(kid);
      sub.length += 1;
      sub.path.insert(sub.path.begin(), kid);
      if (sub.length > best.length ||
          (sub.length == best.length && sub.tip < best.tip))
        best = std::move(sub);
    }
    return best;
  };
  Best b = longest(root);
  std::vector<NakamotoAtt> out;
  out.reserve(b.path.size());
  for (const Hash& h : b.path) out.push_back(atts.at(h));
  return out;
}

// ---------------------------------------------------------------------------
// NakamotoMiner
// ---------------------------------------------------------------------------

NakamotoMiner::NakamotoMiner(NakamotoConfig config) : config_(std::move(config)) {
  tip_ = config_.chain_root.hash;
  tip_height_ = 0;
}

void NakamotoMiner::on_attach(net::Runtime& rt, const net::NodeAddress&) { rt_ = &rt; }

std::string NakamotoMiner::on_block(const Block& block) {
  if (store_.insert(block)) consider_attestation(block);
  return {};
}

void NakamotoMiner::consider_attestation(const Block& block) {
  const auto* integ = std::get_if<IntegrityAttestation>(&block);
  if (!integ) return;
  const auto* pow = std::get_if<NakamotoAtt>(integ);
  if (!pow) return;
  if (!pow_ok(*pow, config_.difficulty_bits)) return;

  Hash att_hash = hash_block(block);
  uint64_t height;
  if (pow->parent.hash == config_.chain_root.hash) {
    height = 1;
  } else {
    auto it = height_index_.find(pow->parent.hash);
    if (it == height_index_.end()) return;  // orphan: parent never seen
    height = it->second.second + 1;
  }
  height_index_[att_hash] = {pow->parent.hash, height};

  if (height > tip_height_) {
    tip_ = att_hash;
    tip_height_ = height;
    // a longer chain interrupts work in progress
    if (mining_ && mining_parent_ != att_hash) {
      mining_ = false;
      ++mining_generation_;
      start_mining();
    }
  }

  // someone mined the block we are working on
  if (mining_ && pow->block.hash == mining_block_) {
    mining_ = false;
    ++mining_generation_;
    queue_.erase(std::remove_if(queue_.begin(), queue_.end(),
                                [&](const PendingRequest& p) {
                                  return p.block.hash == pow->block.hash;
                                }),
                 queue_.end());
    start_mining();
  }

  check_pending_replies();
}

void NakamotoMiner::on_request(MsgKind kind, const Bytes& body, ReplyFn reply) {
  if (kind != MsgKind::ReqIntegrity) {
    reply(ResponseBody::failure("unsupported request kind"));
    return;
  }
  try {
    net::IntegrityPolicy policy = net::decode_integrity_policy(body);
    const auto* request = std::get_if<net::NakamotoRequest>(&policy);
    if (!request) {
      reply(ResponseBody::failure("this fern only serves proof-of-work requests"));
      return;
    }
    if (config_.required_availability.min_count > 0) {
      auto issuers = availability_issuers(request->block, store_, config_.required_availability);
      if (issuers.size() < config_.required_availability.min_count) {
        reply(ResponseBody::failure("availability evidence unmet"));
        return;
      }
    }
    awaiting_depth_[request->block.hash].push_back(reply);
    bool queued =
        std::any_of(queue_.begin(), queue_.end(), [&](const PendingRequest& p) {
          return p.block.hash == request->block.hash;
        });
    bool already_mined = false;
    for (const auto& [att_hash, info] : height_index_) {
      auto blk = store_.get(att_hash);
      if (!blk) continue;
      const auto& pow = std::get<NakamotoAtt>(std::get<IntegrityAttestation>(*blk));
      if (pow.block.hash == request->block.hash) already_mined = true;
    }
    if (!queued && !already_mined) {
      queue_.push_back(PendingRequest{request->block, reply});
      start_mining();
    }
    check_pending_replies();
  } catch (const DecodeError& e) {
    reply(ResponseBody::failure(std::string("bad request: ") + e.what()));
  }
}

void NakamotoMiner::start_mining() {
  if (mining_ || queue_.empty() || !rt_) return;
  mining_ = true;
  mining_block_ = queue_.front().block.hash;
  mining_parent_ = tip_;
  uint64_t generation = ++mining_generation_;

  // completion time follows the geometric law of the difficulty
  double p = std::ldexp(1.0, -static_cast<int>(config_.difficulty_bits));
  std::uniform_real_distribution<double> uniform(1e-12, 1.0);
  double attempts = -std::log(uniform(rt_->rng())) / p;
  int64_t duration = std::max<int64_t>(1, static_cast<int64_t>(attempts / config_.attempts_per_ms));
  rt_->schedule(duration, [this, generation] { finish_mining(generation); });
}

void NakamotoMiner::finish_mining(uint64_t generation) {
  if (!mining_ || generation != mining_generation_) return;
  mining_ = false;
  if (queue_.empty()) return;
  PendingRequest req = queue_.front();
  queue_.pop_front();

  Reference parent_ref = mining_parent_ == config_.chain_root.hash
                             ? config_.chain_root.bare()
                             : Reference::to(mining_parent_);
  NakamotoAtt att = mine(req.block.bare(), parent_ref, config_.difficulty_bits,
                         config_.miner_index, config_.miner_count);
  Block att_block{IntegrityAttestation{att}};
  store_.insert(att_block);
  consider_attestation(att_block);
  if (rt_)
    for (const auto& peer : config_.peers) rt_->send_blocks(peer, {att_block}, nullptr);
  start_mining();
}

void NakamotoMiner::check_pending_replies() {
  if (awaiting_depth_.empty()) return;
  // depth of an attestation = height of the best tip above it, plus one,
  // counted along the tip's ancestry
  std::set<Hash> on_main;
  Hash cursor = tip_;
  while (cursor != config_.chain_root.hash) {
    on_main.insert(cursor);
    auto it = height_index_.find(cursor);
    if (it == height_index_.end()) break;
    cursor = it->second.first;
  }
  for (auto it = awaiting_depth_.begin(); it != awaiting_depth_.end();) {
    const Hash& block_hash = it->first;
    std::optional<Reference> ready;
    for (const Hash& att_hash : on_main) {
      auto blk = store_.get(att_hash);
      if (!blk) continue;
      const auto& pow = std::get<NakamotoAtt>(std::get<IntegrityAttestation>(*blk));
      if (pow.block.hash != block_hash) continue;
      uint64_t height = height_index_.at(att_hash).second;
      uint64_t depth = tip_height_ - height + 1;
      if (depth >= config_.confirmation_depth) ready = Reference::to(att_hash);
    }
    if (ready) {
      for (ReplyFn& reply : it->second) reply(ResponseBody::success_ref(*ready));
      it = awaiting_depth_.erase(it);
    } else {
      ++it;
    }
  }
}

uint64_t NakamotoMiner::chain_height(const Hash& block_hash) const {
  auto it = height_index_.find(block_hash);
  return it == height_index_.end() ? 0 : it->second.second;
}

}  // namespace charlotte::fern
