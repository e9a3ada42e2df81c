#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <random>

#include "charlotte/sim_net.hpp"
#include "charlotte/wilbur.hpp"
#include "doctest.h"

using namespace charlotte;
using namespace charlotte::net;
using namespace charlotte::wilbur;

namespace {

Block opaque(const std::string& payload, std::vector<Reference> parents = {}) {
  return OpaqueData{to_bytes(payload), std::move(parents)};
}

ResponseBody req(SimNetwork& net, Runtime& client, const NodeAddress& dest, MsgKind kind,
                 Bytes body, int64_t timeout = 0) {
  std::optional<Result<ResponseBody>> out;
  client.request(dest, kind, std::move(body), timeout,
                 [&](Result<ResponseBody> r) { out = std::move(r); });
  net.run_until_idle();
  REQUIRE(out.has_value());
  REQUIRE(out->ok());
  return out->value();
}

struct Rig {
  SimNetwork net{SimConfig{}};
  WilburConfig cfg;
  std::unique_ptr<WilburNode> node;
  Runtime* client = nullptr;
  NodeAddress addr = NodeAddress::sim("w");

  explicit Rig(WilburConfig c = {}) : cfg(std::move(c)) {
    if (cfg.key.id().public_key == CryptoId{}.public_key)
      cfg.key = KeyPair::from_seed(uint64_t{1000});
    node = std::make_unique<WilburNode>(cfg);
    net.add_node("w", *node);
    client = &net.add_client("c");
  }
};

}  // namespace

TEST_CASE("store and fetch by hash") {
  Rig rig;
  Block b = opaque("hello");
  rig.client->send_blocks(rig.addr, {b}, nullptr);
  rig.net.run_until_idle();

  ResponseBody resp = req(rig.net, *rig.client, rig.addr, MsgKind::WilburQuery,
                          encode_wilbur_query(hash_block(b)));
  REQUIRE(resp.ok());
  REQUIRE(resp.blocks.size() == 1);
  CHECK(resp.blocks[0] == b);
}

TEST_CASE("duplicate stores are idempotent") {
  Rig rig;
  Block b = opaque("dup");
  rig.client->send_blocks(rig.addr, {b, b}, nullptr);
  rig.client->send_blocks(rig.addr, {b}, nullptr);
  rig.net.run_until_idle();
  CHECK(rig.node->store().size() == 1);
}

TEST_CASE("fresh blocks are relayed to each peer exactly once") {
  SimNetwork net(SimConfig{});
  KeyPair k1 = KeyPair::from_seed(uint64_t{1}), k2 = KeyPair::from_seed(uint64_t{2}),
          k3 = KeyPair::from_seed(uint64_t{3});
  // relay cycle w1 -> w2 -> w3 -> w1 must terminate
  WilburConfig c1{k1, {NodeAddress::sim("w2")}, 0, ""};
  WilburConfig c2{k2, {NodeAddress::sim("w3")}, 0, ""};
  WilburConfig c3{k3, {NodeAddress::sim("w1")}, 0, ""};
  WilburNode w1(c1), w2(c2), w3(c3);
  net.add_node("w1", w1);
  net.add_node("w2", w2);
  net.add_node("w3", w3);
  Runtime& client = net.add_client("c");

  Block b = opaque("ripple");
  client.send_blocks(NodeAddress::sim("w1"), {b}, nullptr);
  net.run_until_idle();

  CHECK(w1.store().size() == 1);
  CHECK(w2.store().size() == 1);
  CHECK(w3.store().size() == 1);
  // one client send + exactly one relay per edge of the cycle
  CHECK(net.deliveries() == 4);
}

TEST_CASE("availability attestation over stored blocks") {
  Rig rig;
  Block b = opaque("stored");
  rig.client->send_blocks(rig.addr, {b}, nullptr);
  rig.net.run_until_idle();

  AvailabilityPolicy policy;
  policy.subjects = {reference_to(b)};
  ResponseBody resp = req(rig.net, *rig.client, rig.addr, MsgKind::ReqAvail,
                          encode_availability_policy(policy));
  REQUIRE(resp.ok());
  REQUIRE(resp.reference.has_value());

  // the attestation itself is stored and self-consistent
  auto att_block = rig.node->store().get(resp.reference->hash);
  REQUIRE(att_block.has_value());
  const auto& att = std::get<StoreForever>(*att_block);
  CHECK(att.subject.hash == hash_block(b));
  CHECK(att.issuer == rig.node->issuer());
  CHECK(verify_payload(att, att.signature));
}

TEST_CASE("availability request for an unknown hash fails fast with zero window") {
  WilburConfig cfg;
  cfg.key = KeyPair::from_seed(uint64_t{4});
  cfg.wait_window_ms = 0;
  Rig rig(cfg);

  Hash unknown;
  unknown.digest.fill(0xaa);
  AvailabilityPolicy policy;
  policy.subjects = {Reference::to(unknown)};
  std::optional<Result<ResponseBody>> out;
  rig.client->request(rig.addr, MsgKind::ReqAvail, encode_availability_policy(policy), 0,
                      [&](Result<ResponseBody> r) { out = std::move(r); });
  rig.net.run_until_idle();
  REQUIRE(out->ok());
  CHECK_FALSE(out->value().ok());
  CHECK(out->value().error.find(unknown.hex()) != std::string::npos);
}

TEST_CASE("availability request waits for late subjects") {
  WilburConfig cfg;
  cfg.key = KeyPair::from_seed(uint64_t{5});
  cfg.wait_window_ms = 5000;
  Rig rig(cfg);

  Block b = opaque("late");
  AvailabilityPolicy policy;
  policy.subjects = {reference_to(b)};

  std::optional<ResponseBody> resp;
  int64_t replied_at = -1;
  rig.client->request(rig.addr, MsgKind::ReqAvail, encode_availability_policy(policy), 0,
                      [&](Result<ResponseBody> r) {
                        REQUIRE(r.ok());
                        resp = r.value();
                        replied_at = rig.net.now_ms();
                      });
  // deliver the subject after one simulated second
  rig.client->schedule(1000, [&] { rig.client->send_blocks(rig.addr, {b}, nullptr); });
  rig.net.run_until_idle();
  REQUIRE(resp.has_value());
  CHECK(resp->ok());
  CHECK(replied_at == 1200);  // 1000 + one-way + reply

  // and times out when the subject never shows
  Hash never;
  never.digest.fill(0x11);
  AvailabilityPolicy p2;
  p2.subjects = {Reference::to(never)};
  std::optional<ResponseBody> r2;
  rig.client->request(rig.addr, MsgKind::ReqAvail, encode_availability_policy(p2), 0,
                      [&](Result<ResponseBody> r) { r2 = r.value(); });
  rig.net.run_until_idle();
  REQUIRE(r2.has_value());
  CHECK_FALSE(r2->ok());
}

TEST_CASE("cover flag pledges referenced attestation hashes") {
  Rig rig;
  // b carries an availability attestation hash in a's reference to it
  Block b = opaque("b");
  Hash b_att_hash;
  b_att_hash.digest.fill(0x33);
  Block b_att{StoreForever{reference_to(b), {}, rig.cfg.key.id(),
                           sign_payload(rig.cfg.key, StoreForever{reference_to(b), {}})}};
  b_att_hash = hash_block(b_att);
  Block a = opaque("a", {make_reference(hash_block(b), {b_att_hash})});

  rig.client->send_blocks(rig.addr, {b, b_att, a}, nullptr);
  rig.net.run_until_idle();

  AvailabilityPolicy policy;
  policy.subjects = {reference_to(a)};
  policy.cover_referenced_attestations = true;
  ResponseBody resp = req(rig.net, *rig.client, rig.addr, MsgKind::ReqAvail,
                          encode_availability_policy(policy));
  REQUIRE(resp.ok());
  auto att_block = rig.node->store().get(resp.reference->hash);
  REQUIRE(att_block.has_value());
  const auto& att = std::get<StoreForever>(*att_block);
  CHECK(std::find(att.covered.begin(), att.covered.end(), b_att_hash) != att.covered.end());
}

TEST_CASE("hash query waits until arrival") {
  Rig rig;
  Block b = opaque("arriving");
  std::optional<ResponseBody> resp;
  rig.client->request(rig.addr, MsgKind::WilburQuery, encode_wilbur_query(hash_block(b)), 0,
                      [&](Result<ResponseBody> r) { resp = r.value(); });
  rig.client->schedule(700, [&] { rig.client->send_blocks(rig.addr, {b}, nullptr); });
  rig.net.run_until_idle();
  REQUIRE(resp.has_value());
  REQUIRE(resp->ok());
  CHECK(resp->blocks.at(0) == b);
}

TEST_CASE("pattern query equals brute-force filter") {
  Rig rig;
  std::mt19937_64 rng(8);
  KeyPair key = KeyPair::from_seed(uint64_t{77});
  Hash chain_a, chain_b;
  chain_a.digest.fill(1);
  chain_b.digest.fill(2);

  std::vector<Block> all;
  for (int i = 0; i < 100; ++i) {
    if (i % 3 == 0) {
      all.push_back(opaque("data" + std::to_string(i)));
    } else {
      ChainSlotAtt att;
      att.block = Reference::to(Hash{HashAlgorithm::Sha3_256, {static_cast<uint8_t>(i)}});
      att.root = Reference::to(i % 2 ? chain_a : chain_b);
      att.slot = 1 + i % 7;
      att.parent = att.root;
      att.issuer = key.id();
      att.signature = sign_payload(key, att);
      all.push_back(IntegrityAttestation{att});
    }
  }
  rig.client->send_blocks(rig.addr, all, nullptr);
  rig.net.run_until_idle();

  // all slot attestations for chain_a
  BlockPattern pat;
  pat.tag = kTagIntegrity;
  pat.subtag = kSubtagChainSlot;
  pat.fields = {{1, encode_reference(Reference::to(chain_a))}};
  ResponseBody resp =
      req(rig.net, *rig.client, rig.addr, MsgKind::WilburQuery, encode_wilbur_query(pat));

  std::vector<Block> expected;
  for (const Block& b : all) {
    const auto* att = std::get_if<IntegrityAttestation>(&b);
    if (!att) continue;
    const auto* slot = std::get_if<ChainSlotAtt>(att);
    if (slot && slot->root.hash == chain_a) expected.push_back(b);
  }
  REQUIRE(resp.ok());
  CHECK(resp.blocks.size() == expected.size());
  for (const Block& b : expected)
    CHECK(std::find(resp.blocks.begin(), resp.blocks.end(), b) != resp.blocks.end());

  // empty pattern returns the whole variant
  BlockPattern variant_only;
  variant_only.tag = kTagIntegrity;
  variant_only.subtag = kSubtagChainSlot;
  ResponseBody all_slots = req(rig.net, *rig.client, rig.addr, MsgKind::WilburQuery,
                               encode_wilbur_query(variant_only));
  size_t slot_count = 0;
  for (const Block& b : all)
    if (std::get_if<IntegrityAttestation>(&b)) ++slot_count;
  CHECK(all_slots.blocks.size() == slot_count);
}

TEST_CASE("issued attestations stay verifiable by audit") {
  Rig rig;
  std::vector<Block> blocks;
  for (int i = 0; i < 20; ++i) blocks.push_back(opaque("blk" + std::to_string(i)));
  rig.client->send_blocks(rig.addr, blocks, nullptr);
  rig.net.run_until_idle();
  for (const Block& b : blocks) {
    AvailabilityPolicy policy;
    policy.subjects = {reference_to(b)};
    req(rig.net, *rig.client, rig.addr, MsgKind::ReqAvail, encode_availability_policy(policy));
  }
  // audit pass: every stored attestation verifies and its subjects resolve
  std::vector<Block> attestations = rig.node->store().scan(
      [](const Block& b) { return std::holds_alternative<StoreForever>(b); });
  CHECK(attestations.size() == blocks.size());
  for (const Block& b : attestations) {
    const auto& att = std::get<StoreForever>(b);
    CHECK(verify_payload(att, att.signature));
    CHECK(rig.node->store().contains(att.subject.hash));
    for (const Hash& h : att.covered) CHECK(rig.node->store().contains(h));
  }
}

TEST_CASE("journal restores the store across restarts") {
  std::string path = (std::filesystem::temp_directory_path() / "wilbur_journal_test.bin").string();
  std::filesystem::remove(path);
  KeyPair key = KeyPair::from_seed(uint64_t{31});
  Block b1 = opaque("persist1"), b2 = opaque("persist2");
  {
    WilburConfig cfg;
    cfg.key = key;
    cfg.journal_path = path;
    WilburNode node(cfg);
    node.on_block(b1);
    node.on_block(b2);
    CHECK(node.store().size() == 2);
  }
  {
    WilburConfig cfg;
    cfg.key = key;
    cfg.journal_path = path;
    WilburNode node(cfg);
    CHECK(node.store().size() == 2);
    CHECK(node.store().contains(hash_block(b1)));
    CHECK(node.store().contains(hash_block(b2)));
  }
  std::filesystem::remove(path);
}
