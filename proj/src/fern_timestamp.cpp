#include "charlotte/fern_timestamp.hpp"

#include <deque>

namespace charlotte::fern {

using net::MsgKind;
using net::ResponseBody;

TimestampFern::TimestampFern(TimestampConfig config) : config_(std::move(config)) {
  if (config_.batch_size < 1) config_.batch_size = 1;
}

void TimestampFern::on_attach(net::Runtime& rt, const net::NodeAddress&) { rt_ = &rt; }

std::string TimestampFern::on_block(const Block& block) {
  store_.insert(block);
  return {};
}

void TimestampFern::on_request(MsgKind kind, const Bytes& body, ReplyFn reply) {
  if (kind != MsgKind::ReqIntegrity) {
    reply(ResponseBody::failure("unsupported request kind"));
    return;
  }
  try {
    net::IntegrityPolicy policy = net::decode_integrity_policy(body);
    const auto* request = std::get_if<net::TimestampRequest>(&policy);
    if (!request) {
      reply(ResponseBody::failure("this fern only serves timestamp requests"));
      return;
    }
    if (request->subjects.empty()) {
      reply(ResponseBody::failure("nothing to timestamp"));
      return;
    }
    reply(ResponseBody::success_ref(issue(request->subjects)));
  } catch (const DecodeError& e) {
    reply(ResponseBody::failure(std::string("bad request: ") + e.what()));
  }
}

Reference TimestampFern::issue(const std::vector<Reference>& subjects) {
  TimestampBatchAtt att;
  att.time_ms = rt_ ? rt_->now_ms() : 0;
  att.subjects = subjects;
  att.issuer = config_.key.id();
  att.signature = sign_payload(config_.key, att);

  Block att_block{IntegrityAttestation{att}};
  store_.insert(att_block);
  Reference ref = reference_to(att_block);

  ++stamps_issued_;
  pending_batch_.push_back(ref);
  if (pending_batch_.size() >= config_.batch_size) {
    flush_batch();
  } else {
    arm_flush_timer();
  }
  return ref;
}

void TimestampFern::flush_batch() {
  if (pending_batch_.empty()) return;
  if (flush_armed_ && rt_) {
    rt_->cancel(flush_timer_);
    flush_armed_ = false;
  }
  std::vector<Reference> batch_subjects;
  batch_subjects.swap(pending_batch_);

  TimestampBatchAtt batch;
  batch.time_ms = rt_ ? rt_->now_ms() : 0;
  batch.subjects = std::move(batch_subjects);
  batch.issuer = config_.key.id();
  batch.signature = sign_payload(config_.key, batch);

  Block batch_block{IntegrityAttestation{batch}};
  store_.insert(batch_block);
  Reference batch_ref = reference_to(batch_block);

  // cross-stamping: peers stamp our batch; their stamps count toward their
  // own batches, which is what entangles the web
  if (rt_) {
    for (const auto& peer : config_.peer_ferns) {
      rt_->send_blocks(peer, {batch_block}, nullptr);
      net::TimestampRequest request{{batch_ref}};
      rt_->request(peer, MsgKind::ReqIntegrity,
                   net::encode_integrity_policy(net::IntegrityPolicy{request}), 0, nullptr);
    }
  }
}

void TimestampFern::arm_flush_timer() {
  if (flush_armed_ || config_.max_batch_delay_ms <= 0 || !rt_) return;
  flush_armed_ = true;
  flush_timer_ = rt_->schedule(config_.max_batch_delay_ms, [this] {
    flush_armed_ = false;
    flush_batch();
  });
}

std::map<CryptoId, int64_t> stamp_coverage(const Hash& target, const BlockStore& store) {
  // reverse edges: hash -> blocks referencing it
  std::map<Hash, std::vector<Hash>> referrers;
  std::map<Hash, Block> blocks;
  store.for_each([&](const Hash& h, const Block& b) {
    blocks.emplace(h, b);
    for (const Hash& out : outbound_hashes(b)) referrers[out].push_back(h);
  });

  std::map<CryptoId, int64_t> earliest;
  if (!blocks.count(target) && !referrers.count(target)) return earliest;

  std::deque<Hash> frontier{target};
  std::set<Hash> seen{target};
  while (!frontier.empty()) {
    Hash current = frontier.front();
    frontier.pop_front();
    auto it = blocks.find(current);
    if (it != blocks.end()) {
      if (const auto* integ = std::get_if<IntegrityAttestation>(&it->second)) {
        if (const auto* stamp = std::get_if<TimestampBatchAtt>(integ)) {
          auto [entry, fresh] = earliest.emplace(stamp->issuer, stamp->time_ms);
          if (!fresh) entry->second = std::min(entry->second, stamp->time_ms);
        }
      }
    }
    auto refs = referrers.find(current);
    if (refs == referrers.end()) continue;
    for (const Hash& up : refs->second)
      if (seen.insert(up).second) frontier.push_back(up);
  }
  return earliest;
}

}  // namespace charlotte::fern
