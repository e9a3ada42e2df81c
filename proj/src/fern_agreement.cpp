#include "charlotte/fern_agreement.hpp"

#include <fstream>
#include <sstream>

namespace charlotte::fern {

using net::MsgKind;
using net::ResponseBody;

std::optional<Hash> SlotLedger::get(const Hash& root, uint64_t slot) const {
  std::lock_guard lock(mu_);
  auto it = slots_.find({root, slot});
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

Hash SlotLedger::put_if_absent(const Hash& root, uint64_t slot, const Hash& block) {
  std::lock_guard lock(mu_);
  auto [it, fresh] = slots_.emplace(Key{root, slot}, block);
  if (fresh && !journal_path_.empty()) {
    std::ofstream out(journal_path_, std::ios::app);
    out << root.hex() << " " << slot << " " << block.hex() << "\n";
    out.flush();
  }
  return it->second;
}

void SlotLedger::open_journal(const std::string& path) {
  std::lock_guard lock(mu_);
  std::ifstream in(path);
  std::string root_hex, block_hex;
  uint64_t slot;
  while (in >> root_hex >> slot >> block_hex) {
    Hash root, block;
    Bytes r = from_hex(root_hex), b = from_hex(block_hex);
    if (r.size() != 32 || b.size() != 32)
      throw std::runtime_error("corrupt ledger journal: " + path);
    std::copy(r.begin(), r.end(), root.digest.begin());
    std::copy(b.begin(), b.end(), block.digest.begin());
    slots_.emplace(Key{root, slot}, block);
  }
  journal_path_ = path;
}

size_t SlotLedger::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

AgreementFern::AgreementFern(AgreementConfig config) : config_(std::move(config)) {
  if (!config_.ledger_journal_path.empty())
    ledger_.open_journal(config_.ledger_journal_path);
}

void AgreementFern::on_attach(net::Runtime& rt, const net::NodeAddress&) { rt_ = &rt; }

std::string AgreementFern::on_block(const Block& block) {
  store_.insert(block);
  return {};
}

void AgreementFern::on_request(MsgKind kind, const Bytes& body, ReplyFn reply) {
  if (kind != MsgKind::ReqIntegrity) {
    reply(ResponseBody::failure("unsupported request kind"));
    return;
  }
  try {
    net::IntegrityPolicy policy = net::decode_integrity_policy(body);
    const auto* request = std::get_if<net::ChainSlotRequest>(&policy);
    if (!request) {
      reply(ResponseBody::failure("this fern only serves chain slot requests"));
      return;
    }
    reply(handle(*request));
  } catch (const DecodeError& e) {
    reply(ResponseBody::failure(std::string("bad request: ") + e.what()));
  }
}

ResponseBody AgreementFern::handle(const net::ChainSlotRequest& request) {
  if (request.slot < 1) return ResponseBody::failure("slot must be at least 1");
  if (request.slot == 1 && request.parent.hash != request.root.hash)
    return ResponseBody::failure("slot 1 must name the root as parent");

  // parent integrity evidence, one level deep
  const IssuerPolicy& parent_policy = config_.required_parent_integrity;
  if (request.slot > 1 && parent_policy.min_count > 0) {
    auto issuers = chain_slot_issuers(request.parent, request.root.hash,
                                      request.slot - 1, store_, parent_policy);
    if (issuers.size() < parent_policy.min_count) {
      std::ostringstream os;
      os << "parent integrity evidence unmet: have " << issuers.size() << " of "
         << parent_policy.min_count << " required attestations for slot "
         << (request.slot - 1);
      return ResponseBody::failure(os.str());
    }
  }

  // availability evidence
  const IssuerPolicy& avail_policy = config_.required_block_availability;
  if (avail_policy.min_count > 0) {
    auto issuers = availability_issuers(request.block, store_, avail_policy);
    if (issuers.size() < avail_policy.min_count) {
      std::ostringstream os;
      os << "availability evidence unmet: have " << issuers.size() << " of "
         << avail_policy.min_count << " required attestations";
      return ResponseBody::failure(os.str());
    }
  } else if (config_.require_block_when_no_availability &&
             !store_.contains(request.block.hash)) {
    return ResponseBody::failure("block not held and no availability evidence required");
  }

  Hash winner = ledger_.put_if_absent(request.root.hash, request.slot, request.block.hash);
  if (winner != request.block.hash)
    return ResponseBody::failure("slot already committed to " + winner.hex());

  // bare references make re-issuance bit-identical: same binding, same block
  ChainSlotAtt att;
  att.block = request.block.bare();
  att.root = request.root.bare();
  att.slot = request.slot;
  att.parent = request.parent.bare();
  att.issuer = config_.key.id();
  att.signature = sign_payload(config_.key, att);

  Block att_block{IntegrityAttestation{att}};
  store_.insert(att_block);
  return ResponseBody::success_ref(reference_to(att_block));
}

}  // namespace charlotte::fern
