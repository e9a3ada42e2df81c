#include "charlotte/sim_net.hpp"

#include <stdexcept>

namespace charlotte::net {

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

class SimRuntime : public Runtime {
 public:
  SimRuntime(SimNetwork& net, std::string label, uint64_t seed)
      : net_(net), label_(std::move(label)), rng_(seed) {}

  int64_t now_ms() override { return net_.now_; }

  uint64_t schedule(int64_t delay_ms, std::function<void()> fn) override {
    uint64_t id = net_.next_timer_++;
    net_.schedule_at(net_.now_ + std::max<int64_t>(0, delay_ms), [this, id, fn = std::move(fn)] {
      auto it = net_.cancelled_timers_.find(id);
      if (it != net_.cancelled_timers_.end()) {
        net_.cancelled_timers_.erase(it);
        return;
      }
      fn();
    });
    return id;
  }

  void cancel(uint64_t timer_id) override { net_.cancelled_timers_.insert(timer_id); }

  void send_blocks(const NodeAddress& dest, std::vector<Block> blocks,
                   std::function<void(SendReport)> on_done) override {
    if (dest.backend != NodeAddress::Backend::Sim) {
      if (on_done) on_done(SendReport{"sim runtime cannot reach " + dest.display(), {}});
      return;
    }
    int64_t lat = net_.latency(label_, dest.label);
    auto* target = net_.entry(dest.label);
    auto* self = net_.entry(label_);

    // account frame bytes per block chunk
    uint64_t sent = 0;
    std::vector<Bytes> encoded;
    encoded.reserve(blocks.size());
    for (const Block& b : blocks) encoded.push_back(canonical_encode(b));
    for (size_t i = 0; i < encoded.size(); ++i)
      sent += kFrameHeaderSize + 9 + encoded[i].size();
    self->bytes_sent += sent;

    if (!target || !target->service) {
      int64_t fail_at = net_.now_ + lat;
      net_.schedule_at(fail_at, [on_done, dest] {
        if (on_done) on_done(SendReport{"no node at " + dest.display(), {}});
      });
      return;
    }

    auto report = std::make_shared<SendReport>();
    std::string from = label_;
    for (size_t i = 0; i < blocks.size(); ++i) {
      bool last = i + 1 == blocks.size();
      Block blk = std::move(blocks[i]);
      uint64_t frame_size = kFrameHeaderSize + 9 + encoded[i].size();
      net_.schedule_at(net_.now_ + lat,
                       [this, target, blk = std::move(blk), i, last, report, on_done, from,
                        frame_size, lat] {
        target->bytes_received += frame_size;
        ++net_.deliveries_;
        std::string err = target->service->on_block(blk);
        if (!err.empty())
          report->block_errors.emplace_back(static_cast<uint32_t>(i), err);
        if (last && on_done) {
          // ack travels back one hop
          uint64_t ack_size = kFrameHeaderSize + 16;
          target->bytes_sent += ack_size;
          net_.schedule_at(net_.now_ + lat, [this, report, on_done, from, ack_size] {
            if (auto* sender = net_.entry(from)) sender->bytes_received += ack_size;
            on_done(*report);
          });
        }
      });
    }
    if (blocks.empty() && on_done) {
      net_.schedule_at(net_.now_ + 2 * lat, [on_done] { on_done(SendReport{}); });
    }
  }

  void request(const NodeAddress& dest, MsgKind kind, Bytes body, int64_t timeout_ms,
               std::function<void(Result<ResponseBody>)> on_reply) override {
    if (dest.backend != NodeAddress::Backend::Sim) {
      if (on_reply)
        on_reply(Result<ResponseBody>::failure("sim runtime cannot reach " + dest.display()));
      return;
    }
    int64_t lat = net_.latency(label_, dest.label);
    auto* self = net_.entry(label_);
    uint64_t frame_size = kFrameHeaderSize + body.size();
    self->bytes_sent += frame_size;

    auto* target = net_.entry(dest.label);
    if (!target || !target->service) {
      net_.schedule_at(net_.now_ + lat, [on_reply, dest] {
        if (on_reply)
          on_reply(Result<ResponseBody>::failure("no node at " + dest.display()));
      });
      return;
    }

    // shared completion state: first of reply / timeout wins
    auto done = std::make_shared<bool>(false);
    uint64_t timer = 0;
    if (timeout_ms > 0) {
      timer = schedule(timeout_ms, [done, on_reply] {
        if (*done) return;
        *done = true;
        if (on_reply) on_reply(Result<ResponseBody>::failure("timeout"));
      });
    }

    std::string from = label_;
    net_.schedule_at(net_.now_ + lat, [this, target, kind, body = std::move(body), on_reply,
                                       done, timer, from, frame_size, lat] {
      target->bytes_received += frame_size;
      ++net_.deliveries_;
      auto reply_fn = [this, on_reply, done, timer, from, target, lat](ResponseBody resp) {
        Bytes payload = encode_response(resp);
        uint64_t resp_size = kFrameHeaderSize + payload.size();
        target->bytes_sent += resp_size;
        net_.schedule_at(net_.now_ + lat,
                         [this, on_reply, done, timer, from, resp = std::move(resp),
                          resp_size]() mutable {
          if (auto* sender = net_.entry(from)) sender->bytes_received += resp_size;
          if (*done) return;
          *done = true;
          if (timer) cancel(timer);
          if (on_reply) on_reply(Result<ResponseBody>::success(std::move(resp)));
        });
      };
      target->service->on_request(kind, body, reply_fn);
    });
  }

  std::mt19937_64& rng() override { return rng_; }

 private:
  SimNetwork& net_;
  std::string label_;
  std::mt19937_64 rng_;
};

SimNetwork::SimNetwork(SimConfig config)
    : config_(std::move(config)), net_rng_(config_.seed) {}

SimNetwork::~SimNetwork() = default;

Runtime& SimNetwork::add_node(const std::string& label, NodeService& service) {
  if (nodes_.count(label)) throw std::invalid_argument("duplicate node label: " + label);
  NodeEntry& e = nodes_[label];
  e.service = &service;
  e.runtime = std::make_unique<SimRuntime>(*this, label, config_.seed ^ fnv1a(label));
  service.on_attach(*e.runtime, NodeAddress::sim(label));
  return *e.runtime;
}

Runtime& SimNetwork::add_client(const std::string& label) {
  if (nodes_.count(label)) throw std::invalid_argument("duplicate node label: " + label);
  NodeEntry& e = nodes_[label];
  e.runtime = std::make_unique<SimRuntime>(*this, label, config_.seed ^ fnv1a(label));
  return *e.runtime;
}

bool SimNetwork::step() {
  if (queue_.empty()) return false;
  Event ev = queue_.top();
  queue_.pop();
  now_ = ev.at;
  ev.fn();
  return true;
}

void SimNetwork::run_until_idle() {
  while (step()) {
  }
}

void SimNetwork::run_for(int64_t duration_ms) {
  int64_t deadline = now_ + duration_ms;
  while (!queue_.empty() && queue_.top().at <= deadline) step();
  now_ = deadline;
}

void SimNetwork::run_while(const std::function<bool()>& keep_going) {
  while (keep_going() && step()) {
  }
}

uint64_t SimNetwork::bytes_sent(const std::string& label) const {
  auto it = nodes_.find(label);
  return it == nodes_.end() ? 0 : it->second.bytes_sent;
}

uint64_t SimNetwork::bytes_received(const std::string& label) const {
  auto it = nodes_.find(label);
  return it == nodes_.end() ? 0 : it->second.bytes_received;
}

void SimNetwork::schedule_at(int64_t at, std::function<void()> fn) {
  queue_.push(Event{at, next_seq_++, std::move(fn)});
}

int64_t SimNetwork::latency(const std::string& from, const std::string& to) {
  int64_t base = config_.default_latency_ms;
  auto it = config_.link_latency_ms.find({from, to});
  if (it != config_.link_latency_ms.end()) base = it->second;
  if (config_.jitter && base > 0) {
    std::uniform_real_distribution<double> d(0.9, 1.1);
    base = static_cast<int64_t>(base * d(net_rng_));
  }
  return base;
}

SimNetwork::NodeEntry* SimNetwork::entry(const std::string& label) {
  auto it = nodes_.find(label);
  return it == nodes_.end() ? nullptr : &it->second;
}

}  // namespace charlotte::net
