#include "charlotte/tcp_net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

namespace charlotte::net {

namespace {

int64_t wall_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

bool read_exact(int fd, uint8_t* buf, size_t len) {
  size_t got = 0;
  while (got < len) {
    ssize_t n = ::recv(fd, buf + got, len - got, 0);
    if (n <= 0) return false;
    got += static_cast<size_t>(n);
  }
  return true;
}

bool write_all(int fd, const uint8_t* buf, size_t len) {
  size_t sent = 0;
  while (sent < len) {
    ssize_t n = ::send(fd, buf + sent, len - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<size_t>(n);
  }
  return true;
}

struct Frame {
  MsgKind kind;
  uint64_t correlation;
  Bytes payload;
};

bool read_frame(int fd, Frame& out) {
  uint8_t header[kFrameHeaderSize];
  if (!read_exact(fd, header, sizeof header)) return false;
  out.kind = static_cast<MsgKind>(header[0]);
  out.correlation = 0;
  for (int i = 0; i < 8; ++i) out.correlation = (out.correlation << 8) | header[1 + i];
  uint32_t len = (uint32_t(header[9]) << 24) | (uint32_t(header[10]) << 16) |
                 (uint32_t(header[11]) << 8) | uint32_t(header[12]);
  if (len > (uint32_t{1} << 30)) return false;
  out.payload.resize(len);
  return len == 0 || read_exact(fd, out.payload.data(), len);
}

bool write_frame(int fd, std::mutex& mu, MsgKind kind, uint64_t correlation,
                 BytesView payload) {
  Bytes frame = encode_frame(kind, correlation, payload);
  std::lock_guard lock(mu);
  return write_all(fd, frame.data(), frame.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// TcpRuntime
// ---------------------------------------------------------------------------

struct TcpRuntime::Waiter {
  std::function<void(Result<ResponseBody>)> on_reply;  // unary requests
  // streams accumulate block errors until the final ack
  std::shared_ptr<SendReport> report;
  std::function<void(SendReport)> on_done;
};

struct TcpRuntime::Connection {
  int fd = -1;
  std::string key;
  std::mutex write_mu;
  std::mutex waiters_mu;
  std::map<uint64_t, Waiter> waiters;
  std::thread reader;
  std::atomic<bool> closed{false};
};

TcpRuntime::TcpRuntime(uint64_t rng_seed) : rng_(rng_seed) {
  timer_thread_ = std::thread([this] { timer_loop(); });
}

TcpRuntime::~TcpRuntime() { shutdown(); }

void TcpRuntime::shutdown() {
  bool expected = false;
  if (!stopping_.compare_exchange_strong(expected, true)) return;
  timer_cv_.notify_all();
  if (timer_thread_.joinable()) timer_thread_.join();
  std::map<std::string, std::shared_ptr<Connection>> conns;
  {
    std::lock_guard lock(state_mu_);
    conns.swap(connections_);
  }
  for (auto& [key, conn] : conns) {
    conn->closed = true;
    ::shutdown(conn->fd, SHUT_RDWR);
    ::close(conn->fd);
    if (conn->reader.joinable()) conn->reader.join();
  }
}

int64_t TcpRuntime::now_ms() { return wall_ms(); }

uint64_t TcpRuntime::schedule(int64_t delay_ms, std::function<void()> fn) {
  std::lock_guard lock(timer_mu_);
  uint64_t id = next_timer_++;
  timers_.push_back(Timer{wall_ms() + delay_ms, id, std::move(fn)});
  std::push_heap(timers_.begin(), timers_.end());
  timer_cv_.notify_all();
  return id;
}

void TcpRuntime::cancel(uint64_t timer_id) {
  std::lock_guard lock(timer_mu_);
  cancelled_[timer_id] = true;
}

void TcpRuntime::timer_loop() {
  std::unique_lock lock(timer_mu_);
  while (!stopping_) {
    if (timers_.empty()) {
      timer_cv_.wait_for(lock, std::chrono::milliseconds(50));
      continue;
    }
    int64_t now = wall_ms();
    if (timers_.front().at > now) {
      timer_cv_.wait_for(lock, std::chrono::milliseconds(timers_.front().at - now));
      continue;
    }
    std::pop_heap(timers_.begin(), timers_.end());
    Timer t = std::move(timers_.back());
    timers_.pop_back();
    auto it = cancelled_.find(t.id);
    if (it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    lock.unlock();
    dispatch(t.fn);
    lock.lock();
  }
}

void TcpRuntime::dispatch(std::function<void()> fn) {
  std::lock_guard lock(dispatch_mu_);
  fn();
}

std::shared_ptr<TcpRuntime::Connection> TcpRuntime::connect_to(const NodeAddress& dest,
                                                               std::string& error) {
  std::string key = dest.display();
  {
    std::lock_guard lock(state_mu_);
    auto it = connections_.find(key);
    if (it != connections_.end() && !it->second->closed) return it->second;
  }
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string port = std::to_string(dest.port);
  if (getaddrinfo(dest.host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
    error = "cannot resolve " + key;
    return nullptr;
  }
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    if (fd >= 0) ::close(fd);
    freeaddrinfo(res);
    error = "cannot connect to " + key;
    return nullptr;
  }
  freeaddrinfo(res);
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

  auto conn = std::make_shared<Connection>();
  conn->fd = fd;
  conn->key = key;
  {
    std::lock_guard lock(state_mu_);
    connections_[key] = conn;
  }
  conn->reader = std::thread([this, conn] { reader_loop(conn); });
  return conn;
}

void TcpRuntime::reader_loop(std::shared_ptr<Connection> conn) {
  Frame frame;
  while (!conn->closed && read_frame(conn->fd, frame)) {
    if (frame.kind != MsgKind::Response) continue;
    ResponseBody resp;
    try {
      resp = decode_response(frame.payload);
    } catch (const DecodeError&) {
      continue;
    }
    Waiter waiter;
    bool stream_error_only = false;
    {
      std::lock_guard lock(conn->waiters_mu);
      auto it = conn->waiters.find(frame.correlation);
      if (it == conn->waiters.end()) continue;
      if (it->second.report) {
        // stream: per-block errors accumulate, empty error is the final ack
        if (!resp.ok()) {
          it->second.report->block_errors.emplace_back(resp.offset, resp.error);
          stream_error_only = true;
        } else {
          waiter = std::move(it->second);
          conn->waiters.erase(it);
        }
      } else {
        waiter = std::move(it->second);
        conn->waiters.erase(it);
      }
    }
    if (stream_error_only) continue;
    if (waiter.on_reply) {
      auto cb = std::move(waiter.on_reply);
      dispatch([cb, resp = std::move(resp)]() mutable {
        cb(Result<ResponseBody>::success(std::move(resp)));
      });
    } else if (waiter.on_done) {
      auto cb = std::move(waiter.on_done);
      auto report = waiter.report;
      dispatch([cb, report] { cb(*report); });
    }
  }
  // connection broke: fail all waiters
  conn->closed = true;
  std::map<uint64_t, Waiter> orphans;
  {
    std::lock_guard lock(conn->waiters_mu);
    orphans.swap(conn->waiters);
  }
  for (auto& [corr, waiter] : orphans) {
    if (waiter.on_reply) {
      auto cb = std::move(waiter.on_reply);
      dispatch([cb] { cb(Result<ResponseBody>::failure("connection lost")); });
    } else if (waiter.on_done) {
      auto cb = std::move(waiter.on_done);
      dispatch([cb] { cb(SendReport{"connection lost", {}}); });
    }
  }
  {
    std::lock_guard lock(state_mu_);
    auto it = connections_.find(conn->key);
    if (it != connections_.end() && it->second == conn) connections_.erase(it);
  }
}

void TcpRuntime::send_blocks(const NodeAddress& dest, std::vector<Block> blocks,
                             std::function<void(SendReport)> on_done) {
  std::string error;
  auto conn = connect_to(dest, error);
  if (!conn) {
    if (on_done) dispatch([on_done, error] { on_done(SendReport{error, {}}); });
    return;
  }
  uint64_t correlation = next_correlation_++;
  {
    std::lock_guard lock(conn->waiters_mu);
    Waiter w;
    w.report = std::make_shared<SendReport>();
    w.on_done = on_done ? on_done : [](SendReport) {};
    conn->waiters[correlation] = std::move(w);
  }
  for (size_t i = 0; i < blocks.size(); ++i) {
    BlockChunk chunk;
    chunk.offset = static_cast<uint32_t>(i);
    chunk.last = i + 1 == blocks.size();
    chunk.block_bytes = canonical_encode(blocks[i]);
    if (!write_frame(conn->fd, conn->write_mu, MsgKind::SendBlocks, correlation,
                     encode_block_chunk(chunk))) {
      std::lock_guard lock(conn->waiters_mu);
      conn->waiters.erase(correlation);
      if (on_done) dispatch([on_done] { on_done(SendReport{"write failed", {}}); });
      return;
    }
  }
  if (blocks.empty()) {
    std::lock_guard lock(conn->waiters_mu);
    conn->waiters.erase(correlation);
    if (on_done) dispatch([on_done] { on_done(SendReport{}); });
  }
}

void TcpRuntime::request(const NodeAddress& dest, MsgKind kind, Bytes body,
                         int64_t timeout_ms,
                         std::function<void(Result<ResponseBody>)> on_reply) {
  std::string error;
  auto conn = connect_to(dest, error);
  if (!conn) {
    if (on_reply)
      dispatch([on_reply, error] { on_reply(Result<ResponseBody>::failure(error)); });
    return;
  }
  uint64_t correlation = next_correlation_++;
  auto done = std::make_shared<std::atomic<bool>>(false);
  auto deliver = [done, on_reply](Result<ResponseBody> r) {
    bool expected = false;
    if (!done->compare_exchange_strong(expected, true)) return;
    if (on_reply) on_reply(std::move(r));
  };
  {
    std::lock_guard lock(conn->waiters_mu);
    Waiter w;
    w.on_reply = deliver;
    conn->waiters[correlation] = std::move(w);
  }
  if (timeout_ms > 0) {
    schedule(timeout_ms, [conn, correlation, deliver] {
      {
        std::lock_guard lock(conn->waiters_mu);
        conn->waiters.erase(correlation);
      }
      deliver(Result<ResponseBody>::failure("timeout"));
    });
  }
  if (!write_frame(conn->fd, conn->write_mu, kind, correlation, body)) {
    std::lock_guard lock(conn->waiters_mu);
    conn->waiters.erase(correlation);
    dispatch([deliver] { deliver(Result<ResponseBody>::failure("write failed")); });
  }
}

std::mt19937_64& TcpRuntime::rng() { return rng_; }

// ---------------------------------------------------------------------------
// TcpServer
// ---------------------------------------------------------------------------

TcpServer::TcpServer(uint16_t port, NodeService& service) : service_(service) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("bind failed on port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("listen failed");
  }
  runtime_ = std::make_unique<TcpRuntime>();
  service_.on_attach(*runtime_, NodeAddress::tcp("127.0.0.1", port_));
  accept_thread_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  bool expected = false;
  if (!stopping_.compare_exchange_strong(expected, true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  {
    std::lock_guard lock(conn_mu_);
    for (auto& t : conn_threads_)
      if (t.joinable()) t.join();
  }
  runtime_->shutdown();
}

void TcpServer::accept_loop() {
  while (!stopping_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(conn_mu_);
    conn_threads_.emplace_back([this, fd] { connection_loop(fd); });
  }
}

void TcpServer::connection_loop(int fd) {
  auto write_mu = std::make_shared<std::mutex>();
  Frame frame;
  while (!stopping_ && read_frame(fd, frame)) {
    switch (frame.kind) {
      case MsgKind::SendBlocks: {
        BlockChunk chunk;
        std::string err;
        try {
          chunk = decode_block_chunk(frame.payload);
        } catch (const DecodeError& e) {
          err = std::string("bad chunk: ") + e.what();
          chunk.last = true;  // cannot trust the stream any further
        }
        if (err.empty()) {
          try {
            Block block = canonical_decode(chunk.block_bytes);
            std::lock_guard lock(runtime_->dispatch_mutex());
            err = service_.on_block(block);
          } catch (const DecodeError& e) {
            err = std::string("undecodable block: ") + e.what();
          }
        }
        if (!err.empty()) {
          ResponseBody resp = ResponseBody::failure(err, chunk.offset);
          write_frame(fd, *write_mu, MsgKind::Response, frame.correlation,
                      encode_response(resp));
        }
        if (chunk.last) {
          ResponseBody ok;
          ok.offset = chunk.offset + 1;
          write_frame(fd, *write_mu, MsgKind::Response, frame.correlation,
                      encode_response(ok));
        }
        break;
      }
      case MsgKind::ReqAvail:
      case MsgKind::ReqIntegrity:
      case MsgKind::WilburQuery: {
        uint64_t correlation = frame.correlation;
        auto reply = [fd, write_mu, correlation](ResponseBody resp) {
          write_frame(fd, *write_mu, MsgKind::Response, correlation,
                      encode_response(resp));
        };
        std::lock_guard lock(runtime_->dispatch_mutex());
        service_.on_request(frame.kind, frame.payload, reply);
        break;
      }
      default:
        break;  // responses are not expected on server connections
    }
  }
  ::close(fd);
}

// ---------------------------------------------------------------------------
// Blocking helpers
// ---------------------------------------------------------------------------

Result<ResponseBody> request_blocking(Runtime& rt, const NodeAddress& dest, MsgKind kind,
                                      Bytes body, int64_t timeout_ms) {
  std::mutex mu;
  std::condition_variable cv;
  std::optional<Result<ResponseBody>> result;
  rt.request(dest, kind, std::move(body), timeout_ms, [&](Result<ResponseBody> r) {
    std::lock_guard lock(mu);
    result = std::move(r);
    cv.notify_all();
  });
  std::unique_lock lock(mu);
  cv.wait(lock, [&] { return result.has_value(); });
  return std::move(*result);
}

SendReport send_blocks_blocking(Runtime& rt, const NodeAddress& dest,
                                std::vector<Block> blocks, int64_t timeout_ms) {
  std::mutex mu;
  std::condition_variable cv;
  std::optional<SendReport> result;
  rt.send_blocks(dest, std::move(blocks), [&](SendReport r) {
    std::lock_guard lock(mu);
    result = std::move(r);
    cv.notify_all();
  });
  std::unique_lock lock(mu);
  if (!cv.wait_for(lock, std::chrono::milliseconds(timeout_ms > 0 ? timeout_ms : 30000),
                   [&] { return result.has_value(); }))
    return SendReport{"timeout", {}};
  return std::move(*result);
}

}  // namespace charlotte::net
