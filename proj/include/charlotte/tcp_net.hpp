#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "charlotte/transport.hpp"

namespace charlotte::net {

// Real-socket backend. One connection per peer, one reader thread per
// connection, a shared timer thread. Service callbacks are serialized by a
// per-node dispatch mutex, matching the sim backend's contract.
class TcpRuntime : public Runtime {
 public:
  explicit TcpRuntime(uint64_t rng_seed = 0);
  ~TcpRuntime() override;

  int64_t now_ms() override;
  uint64_t schedule(int64_t delay_ms, std::function<void()> fn) override;
  void cancel(uint64_t timer_id) override;
  void send_blocks(const NodeAddress& dest, std::vector<Block> blocks,
                   std::function<void(SendReport)> on_done) override;
  void request(const NodeAddress& dest, MsgKind kind, Bytes body, int64_t timeout_ms,
               std::function<void(Result<ResponseBody>)> on_reply) override;
  std::mt19937_64& rng() override;

  void shutdown();
  std::mutex& dispatch_mutex() { return dispatch_mu_; }

 private:
  struct Connection;
  struct Waiter;

  std::shared_ptr<Connection> connect_to(const NodeAddress& dest, std::string& error);
  void reader_loop(std::shared_ptr<Connection> conn);
  void timer_loop();
  void dispatch(std::function<void()> fn);  // runs fn under the dispatch mutex

  std::mutex dispatch_mu_;
  std::mutex state_mu_;
  std::map<std::string, std::shared_ptr<Connection>> connections_;
  std::atomic<uint64_t> next_correlation_{1};
  std::mt19937_64 rng_;

  // timers
  struct Timer {
    int64_t at;
    uint64_t id;
    std::function<void()> fn;
    bool operator<(const Timer& o) const { return at > o.at; }
  };
  std::mutex timer_mu_;
  std::condition_variable timer_cv_;
  std::vector<Timer> timers_;  // heap
  std::map<uint64_t, bool> cancelled_;
  uint64_t next_timer_ = 1;
  std::thread timer_thread_;
  std::atomic<bool> stopping_{false};
};

class TcpServer {
 public:
  // Binds and listens immediately; throws std::runtime_error on failure.
  TcpServer(uint16_t port, NodeService& service);
  ~TcpServer();

  uint16_t port() const { return port_; }
  TcpRuntime& runtime() { return *runtime_; }
  void stop();

 private:
  void accept_loop();
  void connection_loop(int fd);

  NodeService& service_;
  uint16_t port_;
  int listen_fd_ = -1;
  std::unique_ptr<TcpRuntime> runtime_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex conn_mu_;
  std::vector<std::thread> conn_threads_;
};

// Convenience blocking wrapper for CLI and tests. Must not be called from a
// dispatch callback.
Result<ResponseBody> request_blocking(Runtime& rt, const NodeAddress& dest, MsgKind kind,
                                      Bytes body, int64_t timeout_ms);
SendReport send_blocks_blocking(Runtime& rt, const NodeAddress& dest,
                                std::vector<Block> blocks, int64_t timeout_ms);

}  // namespace charlotte::net
