#pragma once

#include <map>

#include "charlotte/fern_common.hpp"
#include "charlotte/transport.hpp"

namespace charlotte::fern {

enum class Ancestry { Yes, No, MissingEvidence };

// True ancestry (reflexive) through commit parent references, bounded by a
// search budget against adversarially deep requests.
Ancestry is_ancestor(const Hash& ancestor, const Hash& descendant, const BlockStore& store,
                     size_t budget = 10000);

struct GitsimConfig {
  KeyPair key;
  std::vector<CryptoId> allowed_authors;  // empty allows anyone
  IssuerPolicy required_availability;     // optional storage proof on the commit
  size_t ancestry_budget = 10000;
  std::string ledger_journal_path;
};

// Version-control fern: tracks the head commit of each branch and attests
// only to forward movement along the commit graph.
class GitsimFern : public net::NodeService {
 public:
  explicit GitsimFern(GitsimConfig config);

  std::string on_block(const Block& block) override;
  void on_request(net::MsgKind kind, const Bytes& body, ReplyFn reply) override;
  void on_attach(net::Runtime& rt, const net::NodeAddress& self) override;

  BlockStore& store() { return store_; }
  std::optional<Hash> branch_head(const std::string& branch) const;
  const CryptoId& issuer() const { return config_.key.id(); }

 private:
  net::ResponseBody handle(const net::GitBranchRequest& request);
  void journal_head(const std::string& branch, const Hash& head);

  GitsimConfig config_;
  BlockStore store_;
  std::map<std::string, Hash> heads_;
  net::Runtime* rt_ = nullptr;
};

}  // namespace charlotte::fern
