#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "charlotte/transport.hpp"

namespace charlotte::net {

// Deterministic discrete-event network with a virtual clock. All node
// handlers run on one logical timeline; identical seed and workload give
// identical delivery order and timestamps.
struct SimConfig {
  int64_t default_latency_ms = 100;
  uint64_t seed = 1;
  bool jitter = false;  // uniform +-10% per message, seed-driven
  std::map<std::pair<std::string, std::string>, int64_t> link_latency_ms;
};

class SimNetwork {
 public:
  explicit SimNetwork(SimConfig config);
  ~SimNetwork();

  // Attaches a service under a label; the returned runtime is bound to it.
  Runtime& add_node(const std::string& label, NodeService& service);
  // A runtime for a client that serves nothing.
  Runtime& add_client(const std::string& label);

  bool step();                 // run the next event; false when idle
  void run_until_idle();
  void run_for(int64_t duration_ms);
  void run_while(const std::function<bool()>& keep_going);
  int64_t now_ms() const { return now_; }

  uint64_t bytes_sent(const std::string& label) const;
  uint64_t bytes_received(const std::string& label) const;
  uint64_t deliveries() const { return deliveries_; }

 private:
  friend class SimRuntime;

  struct Event {
    int64_t at;
    uint64_t seq;
    std::function<void()> fn;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  struct NodeEntry {
    NodeService* service = nullptr;  // null for pure clients
    std::unique_ptr<class SimRuntime> runtime;
    uint64_t bytes_sent = 0;
    uint64_t bytes_received = 0;
  };

  void schedule_at(int64_t at, std::function<void()> fn);
  int64_t latency(const std::string& from, const std::string& to);
  NodeEntry* entry(const std::string& label);

  SimConfig config_;
  int64_t now_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t next_correlation_ = 1;
  uint64_t deliveries_ = 0;
  std::mt19937_64 net_rng_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::map<std::string, NodeEntry> nodes_;
  std::unordered_set<uint64_t> cancelled_timers_;
  uint64_t next_timer_ = 1;
};

}  // namespace charlotte::net
