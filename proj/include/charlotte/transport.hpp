#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "charlotte/core.hpp"

namespace charlotte::net {

enum class MsgKind : uint8_t {
  SendBlocks = 1,
  ReqAvail = 2,
  ReqIntegrity = 3,
  WilburQuery = 4,
  Response = 5,
};

struct NodeAddress {
  enum class Backend { Sim, Tcp };
  Backend backend = Backend::Sim;
  std::string label;   // sim
  std::string host;    // tcp
  uint16_t port = 0;   // tcp

  static NodeAddress sim(std::string l) {
    NodeAddress a;
    a.label = std::move(l);
    return a;
  }
  static NodeAddress tcp(std::string h, uint16_t p) {
    NodeAddress a;
    a.backend = Backend::Tcp;
    a.host = std::move(h);
    a.port = p;
    return a;
  }

  std::string display() const {
    return backend == Backend::Sim ? "sim:" + label : host + ":" + std::to_string(port);
  }
  auto operator<=>(const NodeAddress&) const = default;
};

// ---------------------------------------------------------------------------
// Request / response bodies
// ---------------------------------------------------------------------------

struct AvailabilityPolicy {
  std::vector<Reference> subjects;  // nonempty
  bool cover_referenced_attestations = false;

  bool operator==(const AvailabilityPolicy&) const = default;
};

struct ChainSlotRequest {
  Reference block;
  Reference root;
  uint64_t slot = 0;
  Reference parent;

  bool operator==(const ChainSlotRequest&) const = default;
};

struct TimestampRequest {
  std::vector<Reference> subjects;

  bool operator==(const TimestampRequest&) const = default;
};

struct NakamotoRequest {
  Reference block;

  bool operator==(const NakamotoRequest&) const = default;
};

struct GitBranchRequest {
  std::string branch_name;
  Reference commit;

  bool operator==(const GitBranchRequest&) const = default;
};

// One block bound to one slot on each listed chain; more than one chain makes
// this a meet request.
struct HetconsRequest {
  HetconsValue value;

  bool operator==(const HetconsRequest&) const = default;
};

using IntegrityPolicy = std::variant<ChainSlotRequest, TimestampRequest, NakamotoRequest,
                                     GitBranchRequest, HetconsRequest>;

// Fill-in-the-blank pattern: a block variant with a subset of fields pinned
// to exact canonical payloads. Field indices follow declared order.
struct BlockPattern {
  uint8_t tag = 0;
  std::optional<uint8_t> subtag;
  std::vector<std::pair<uint32_t, Bytes>> fields;

  bool operator==(const BlockPattern&) const = default;
};

bool pattern_matches(const BlockPattern& pattern, const Block& block);

using WilburQueryInput = std::variant<Hash, BlockPattern>;

struct ResponseBody {
  std::string error;  // empty = success
  uint32_t offset = 0;  // stream offset for SendBlocks errors
  std::optional<Reference> reference;
  std::vector<Block> blocks;

  bool ok() const { return error.empty(); }
  static ResponseBody failure(std::string msg, uint32_t off = 0) {
    ResponseBody r;
    r.error = std::move(msg);
    r.offset = off;
    return r;
  }
  static ResponseBody success_ref(Reference ref) {
    ResponseBody r;
    r.reference = std::move(ref);
    return r;
  }
};

Bytes encode_availability_policy(const AvailabilityPolicy& p);
AvailabilityPolicy decode_availability_policy(BytesView b);
Bytes encode_integrity_policy(const IntegrityPolicy& p);
IntegrityPolicy decode_integrity_policy(BytesView b);
Bytes encode_wilbur_query(const WilburQueryInput& q);
WilburQueryInput decode_wilbur_query(BytesView b);
Bytes encode_response(const ResponseBody& r);
ResponseBody decode_response(BytesView b);

// Stream chunk for SendBlocks: offset, last flag, block bytes.
struct BlockChunk {
  uint32_t offset = 0;
  bool last = false;
  Bytes block_bytes;
};
Bytes encode_block_chunk(const BlockChunk& c);
BlockChunk decode_block_chunk(BytesView b);

// Wire frame shared by both backends: kind, correlation, length, payload.
constexpr size_t kFrameHeaderSize = 13;
Bytes encode_frame(MsgKind kind, uint64_t correlation, BytesView payload);

// ---------------------------------------------------------------------------
// Node and runtime interfaces
// ---------------------------------------------------------------------------

template <typename T>
class Result {
 public:
  static Result success(T v) {
    Result r;
    r.value_ = std::move(v);
    return r;
  }
  static Result failure(std::string msg) {
    Result r;
    r.error_ = std::move(msg);
    return r;
  }
  bool ok() const { return value_.has_value(); }
  const T& value() const { return *value_; }
  T& value() { return *value_; }
  const std::string& error() const { return error_; }

 private:
  std::optional<T> value_;
  std::string error_;
};

struct SendReport {
  std::string transport_error;  // empty if the stream completed
  std::vector<std::pair<uint32_t, std::string>> block_errors;
  bool ok() const { return transport_error.empty() && block_errors.empty(); }
};

class Runtime;

// A server's protocol surface. Both backends invoke these serially per node.
class NodeService {
 public:
  virtual ~NodeService() = default;

  // One block of an inbound stream; returns an error message or empty.
  virtual std::string on_block(const Block& block) = 0;

  // Unary request; reply exactly once, possibly later.
  using ReplyFn = std::function<void(ResponseBody)>;
  virtual void on_request(MsgKind kind, const Bytes& body, ReplyFn reply) = 0;

  // Called when the node is attached to a network.
  virtual void on_attach(Runtime& rt, const NodeAddress& self) {}
};

class Runtime {
 public:
  virtual ~Runtime() = default;

  virtual int64_t now_ms() = 0;
  virtual uint64_t schedule(int64_t delay_ms, std::function<void()> fn) = 0;
  virtual void cancel(uint64_t timer_id) = 0;

  virtual void send_blocks(const NodeAddress& dest, std::vector<Block> blocks,
                           std::function<void(SendReport)> on_done) = 0;

  virtual void request(const NodeAddress& dest, MsgKind kind, Bytes body,
                       int64_t timeout_ms,
                       std::function<void(Result<ResponseBody>)> on_reply) = 0;

  virtual std::mt19937_64& rng() = 0;
};

}  // namespace charlotte::net
