#include "charlotte/fern_gitsim.hpp"

#include <deque>
#include <fstream>

namespace charlotte::fern {

using net::MsgKind;
using net::ResponseBody;

Ancestry is_ancestor(const Hash& ancestor, const Hash& descendant, const BlockStore& store,
                     size_t budget) {
  if (ancestor == descendant) return Ancestry::Yes;
  std::deque<Hash> frontier{descendant};
  std::set<Hash> seen{descendant};
  size_t visited = 0;
  while (!frontier.empty()) {
    if (++visited > budget) return Ancestry::MissingEvidence;
    Hash current = frontier.front();
    frontier.pop_front();
    auto blk = store.get(current);
    if (!blk) return Ancestry::MissingEvidence;
    const auto* commit = std::get_if<GitCommit>(&*blk);
    if (!commit) return Ancestry::MissingEvidence;
    const auto* parents = std::get_if<std::vector<GitCommit::Parent>>(&commit->body);
    if (!parents) continue;  // initial commit
    for (const auto& parent : *parents) {
      if (parent.commit.hash == ancestor) return Ancestry::Yes;
      if (seen.insert(parent.commit.hash).second) frontier.push_back(parent.commit.hash);
    }
  }
  return Ancestry::No;
}

GitsimFern::GitsimFern(GitsimConfig config) : config_(std::move(config)) {
  if (!config_.ledger_journal_path.empty()) {
    std::ifstream in(config_.ledger_journal_path);
    std::string branch, head_hex;
    while (in >> branch >> head_hex) {
      Bytes digest = from_hex(head_hex);
      if (digest.size() != 32)
        throw std::runtime_error("corrupt branch journal: " + config_.ledger_journal_path);
      Hash h;
      std::copy(digest.begin(), digest.end(), h.digest.begin());
      heads_[branch] = h;  // last entry per branch wins
    }
  }
}

void GitsimFern::on_attach(net::Runtime& rt, const net::NodeAddress&) { rt_ = &rt; }

std::string GitsimFern::on_block(const Block& block) {
  store_.insert(block);
  return {};
}

std::optional<Hash> GitsimFern::branch_head(const std::string& branch) const {
  auto it = heads_.find(branch);
  if (it == heads_.end()) return std::nullopt;
  return it->second;
}

void GitsimFern::on_request(MsgKind kind, const Bytes& body, ReplyFn reply) {
  if (kind != MsgKind::ReqIntegrity) {
    reply(ResponseBody::failure("unsupported request kind"));
    return;
  }
  try {
    net::IntegrityPolicy policy = net::decode_integrity_policy(body);
    const auto* request = std::get_if<net::GitBranchRequest>(&policy);
    if (!request) {
      reply(ResponseBody::failure("this fern only serves branch requests"));
      return;
    }
    reply(handle(*request));
  } catch (const DecodeError& e) {
    reply(ResponseBody::failure(std::string("bad request: ") + e.what()));
  }
}

void GitsimFern::journal_head(const std::string& branch, const Hash& head) {
  if (config_.ledger_journal_path.empty()) return;
  std::ofstream out(config_.ledger_journal_path, std::ios::app);
  out << branch << " " << head.hex() << "\n";
  out.flush();
}

ResponseBody GitsimFern::handle(const net::GitBranchRequest& request) {
  if (request.branch_name.empty()) return ResponseBody::failure("branch name required");

  auto blk = store_.get(request.commit.hash);
  if (!blk)
    return ResponseBody::failure("commit " + request.commit.hash.hex() + " not held");
  const auto* commit = std::get_if<GitCommit>(&*blk);
  if (!commit) return ResponseBody::failure("referenced block is not a commit");

  if (commit->signature.signer != commit->author ||
      !verify_payload(*commit, commit->signature))
    return ResponseBody::failure("commit signature invalid");

  if (!config_.allowed_authors.empty() &&
      std::find(config_.allowed_authors.begin(), config_.allowed_authors.end(),
                commit->author) == config_.allowed_authors.end())
    return ResponseBody::failure("author not allowed on this server");

  if (config_.required_availability.min_count > 0) {
    auto issuers = availability_issuers(request.commit, store_, config_.required_availability);
    if (issuers.size() < config_.required_availability.min_count)
      return ResponseBody::failure("availability evidence unmet");
  }

  auto head = heads_.find(request.branch_name);
  if (head != heads_.end()) {
    switch (is_ancestor(head->second, request.commit.hash, store_, config_.ancestry_budget)) {
      case Ancestry::Yes:
        break;
      case Ancestry::No:
        return ResponseBody::failure("branch " + request.branch_name +
                                     " cannot jump to an unrelated commit");
      case Ancestry::MissingEvidence:
        return ResponseBody::failure("ancestry of " + request.commit.hash.hex() +
                                     " cannot be established from held commits");
    }
  }

  heads_[request.branch_name] = request.commit.hash;
  journal_head(request.branch_name, request.commit.hash);

  GitBranchAtt att;
  att.time_ms = rt_ ? rt_->now_ms() : 0;
  att.branch_name = request.branch_name;
  att.commit = request.commit.bare();
  att.issuer = config_.key.id();
  att.signature = sign_payload(config_.key, att);

  Block att_block{IntegrityAttestation{att}};
  store_.insert(att_block);
  return ResponseBody::success_ref(reference_to(att_block));
}

}  // namespace charlotte::fern
