#include "vblob/rpc/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "vblob/wire.hpp"

namespace vblob::rpc {

namespace {

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    ssize_t k = ::recv(fd, data, n, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

enum class ReadStatus { Ok, Closed, BadLength };

/// Reads one length-prefixed frame into `raw` (prefix included).
ReadStatus read_frame(int fd, Bytes& raw) {
  raw.resize(4);
  if (!read_all(fd, raw.data(), 4)) return ReadStatus::Closed;
  auto length = *peek_length(raw);
  if (length == 0 || length > kMaxFrameLength) return ReadStatus::BadLength;
  raw.resize(4 + std::size_t{length});
  if (!read_all(fd, raw.data() + 4, length)) return ReadStatus::Closed;
  return ReadStatus::Ok;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

Frame error_frame(std::uint64_t id, Errc code, const std::string& message) {
  return reply_frame(Opcode::Error, id, ErrorReply{code, message});
}

}  // namespace

Frame Dispatcher::handle(const Frame& request) {
  try {
    if (auto direct = dispatch_frame(request)) return *std::move(direct);
    return reply_frame(request.opcode, request.request_id, dispatch(parse_request(request)));
  } catch (const Error& e) {
    return error_frame(request.request_id, e.code(), e.what());
  } catch (const std::exception& e) {
    return error_frame(request.request_id, Errc::Internal, e.what());
  }
}

Frame LoopbackChannel::roundtrip(Frame request, std::chrono::milliseconds) {
  // Bodies stay in wire encoding; only the length prefix is skipped.
  request.request_id = next_id_++;
  if (request.body.size() + kFrameHeaderLength > kMaxFrameLength) raise(Errc::Malformed, "request frame too long");
  auto reply = service_->handle(request);
  if (reply.body.size() + kFrameHeaderLength > kMaxFrameLength) raise(Errc::Malformed, "reply frame too long");
  if (reply.request_id != request.request_id) raise(Errc::Malformed, "reply id mismatch");
  return reply;
}

LoopbackRegistry& LoopbackRegistry::instance() {
  static LoopbackRegistry registry;
  return registry;
}

void LoopbackRegistry::bind(const std::string& name, std::shared_ptr<Service> service) {
  std::lock_guard lock(mu_);
  services_[name] = std::move(service);
}

void LoopbackRegistry::unbind(const std::string& name) {
  std::lock_guard lock(mu_);
  services_.erase(name);
}

std::shared_ptr<Service> LoopbackRegistry::lookup(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = services_.find(name);
  if (it == services_.end()) raise(Errc::Connection, "no loopback service named " + name);
  return it->second;
}

std::pair<std::string, std::uint16_t> parse_host_port(const std::string& endpoint) {
  std::string rest = endpoint;
  if (rest.rfind("tcp://", 0) == 0) rest = rest.substr(6);
  auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
    raise(Errc::InvalidArgument, "endpoint '" + endpoint + "' is not host:port");
  }
  unsigned long port = 0;
  try {
    port = std::stoul(rest.substr(colon + 1));
  } catch (const std::exception&) {
    raise(Errc::InvalidArgument, "bad port in '" + endpoint + "'");
  }
  if (port > 65535) raise(Errc::InvalidArgument, "bad port in '" + endpoint + "'");
  return {rest.substr(0, colon), static_cast<std::uint16_t>(port)};
}

// ---- TcpChannel -------------------------------------------------------------

TcpChannel::TcpChannel(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  auto port_str = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || !res) {
    raise(Errc::Connection, "cannot resolve " + host);
  }
  for (auto* ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) raise(Errc::Connection, "cannot connect to " + host + ":" + port_str + ": " + std::strerror(errno));
  set_nodelay(fd_);
  reader_ = std::thread([this] { read_loop(); });
}

TcpChannel::~TcpChannel() {
  broken_ = true;
  ::shutdown(fd_, SHUT_RDWR);
  if (reader_.joinable()) reader_.join();
  ::close(fd_);
}

void TcpChannel::fail_pending(const std::string& why) {
  broken_ = true;
  std::lock_guard lock(pending_mu_);
  for (auto& [id, promise] : pending_) {
    promise.set_exception(std::make_exception_ptr(Error(Errc::Connection, "CONNECTION: " + why)));
  }
  pending_.clear();
}

void TcpChannel::read_loop() {
  Bytes raw;
  for (;;) {
    if (read_frame(fd_, raw) != ReadStatus::Ok) break;
    Frame frame;
    try {
      frame = decode_frame(raw);
    } catch (const Error&) {
      break;
    }
    std::lock_guard lock(pending_mu_);
    auto it = pending_.find(frame.request_id);
    if (it == pending_.end()) continue;  // caller already timed out
    it->second.set_value(std::move(frame));
    pending_.erase(it);
  }
  fail_pending("connection closed");
}

Frame TcpChannel::roundtrip(Frame request, std::chrono::milliseconds timeout) {
  if (broken_) raise(Errc::Connection, "connection is closed");
  request.request_id = next_id_++;
  auto wire = encode_frame(request);
  std::future<Frame> reply;
  {
    std::lock_guard lock(pending_mu_);
    reply = pending_[request.request_id].get_future();
  }
  {
    std::lock_guard lock(write_mu_);
    if (!write_all(fd_, wire.data(), wire.size())) {
      std::lock_guard plock(pending_mu_);
      pending_.erase(request.request_id);
      raise(Errc::Connection, "send failed");
    }
  }
  if (reply.wait_for(timeout) != std::future_status::ready) {
    std::lock_guard lock(pending_mu_);
    pending_.erase(request.request_id);
    raise(Errc::Timeout, "no reply within " + std::to_string(timeout.count()) + " ms");
  }
  return reply.get();
}

// ---- TcpServer --------------------------------------------------------------

struct TcpServer::Connection {
  int fd = -1;
  std::mutex write_mu;

  ~Connection() {
    if (fd >= 0) ::close(fd);
  }

  void send(const Frame& f) {
    auto wire = encode_frame(f);
    std::lock_guard lock(write_mu);
    write_all(fd, wire.data(), wire.size());
  }
};

TcpServer::TcpServer(std::shared_ptr<Service> service, const std::string& host, std::uint16_t port)
    : service_(std::move(service)), host_(host) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) raise(Errc::Connection, "socket failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  std::string bind_host = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    raise(Errc::InvalidArgument, "listen address must be an IPv4 literal: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 128) != 0) {
    auto why = std::string(std::strerror(errno));
    ::close(listen_fd_);
    raise(Errc::Connection, "cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> readers;
  {
    std::lock_guard lock(conns_mu_);
    for (auto& c : conns_) ::shutdown(c->fd, SHUT_RDWR);
    readers.swap(readers_);
  }
  for (auto& t : readers) t.join();
  std::lock_guard lock(conns_mu_);
  conns_.clear();
}

void TcpServer::accept_loop() {
  for (;;) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (stopping_) {
      ::close(fd);
      return;
    }
    set_nodelay(fd);
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    std::lock_guard lock(conns_mu_);
    conns_.push_back(conn);
    readers_.emplace_back([this, conn] { serve_connection(conn); });
  }
}

void TcpServer::serve_connection(std::shared_ptr<Connection> conn) {
  Bytes raw;
  for (;;) {
    auto status = read_frame(conn->fd, raw);
    if (status != ReadStatus::Ok) break;  // a bad length prefix leaves no way to resynchronize
    Frame frame;
    try {
      frame = decode_frame(raw);
    } catch (const Error& e) {
      // Length is sane but shorter than the header: answer and keep going.
      std::uint64_t id = 0;
      if (raw.size() >= 5 + 8) id = WireReader(std::span(raw).subspan(5, 8)).u64();
      conn->send(error_frame(id, Errc::Malformed, e.what()));
      continue;
    }
    // Handlers may block (WAIT_PUBLISHED); each gets its own thread and keeps
    // the connection and service alive for as long as it runs.
    std::thread([service = service_, conn, frame = std::move(frame)] {
      conn->send(service->handle(frame));
    }).detach();
  }
  ::shutdown(conn->fd, SHUT_RDWR);
}

// ---- Connector --------------------------------------------------------------

struct Connector::Link {
  LinkModel model;
  std::mutex mu;
  std::chrono::steady_clock::time_point free_at{};

  /// Reserves the link for `bytes` and returns when the transfer would end.
  std::chrono::steady_clock::time_point reserve(std::size_t bytes) {
    auto now = std::chrono::steady_clock::now();
    std::chrono::nanoseconds busy{0};
    if (model.bytes_per_second > 0) {
      busy = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 * static_cast<double>(bytes) / model.bytes_per_second));
    }
    std::lock_guard lock(mu);
    auto start = std::max(now, free_at);
    free_at = start + busy;
    return free_at;
  }
};

namespace {

class ShapedChannel final : public Channel {
 public:
  ShapedChannel(std::shared_ptr<Channel> inner, std::shared_ptr<void> link_owner,
                std::function<std::chrono::steady_clock::time_point(std::size_t)> reserve,
                std::chrono::microseconds latency)
      : inner_(std::move(inner)), link_owner_(std::move(link_owner)), reserve_(std::move(reserve)),
        latency_(latency) {}

  Frame roundtrip(Frame request, std::chrono::milliseconds timeout) override {
    // Both directions are charged after the call, so each request costs one
    // wake-up; the link time consumed is the same.
    const std::size_t out_bytes = request.body.size() + 13;
    auto reply = inner_->roundtrip(std::move(request), timeout);
    std::this_thread::sleep_until(reserve_(out_bytes + reply.body.size() + 13) + latency_);
    return reply;
  }

 private:
  std::shared_ptr<Channel> inner_;
  std::shared_ptr<void> link_owner_;
  std::function<std::chrono::steady_clock::time_point(std::size_t)> reserve_;
  std::chrono::microseconds latency_;
};

}  // namespace

Connector::Connector(LinkModel link) : model_(link), link_(std::make_shared<Link>()) { link_->model = link; }

std::shared_ptr<Channel> Connector::channel(const std::string& endpoint) {
  std::lock_guard lock(mu_);
  if (auto it = channels_.find(endpoint); it != channels_.end()) {
    auto* tcp = dynamic_cast<TcpChannel*>(it->second.raw.get());
    if (!tcp || !tcp->broken()) return it->second.exposed;
  }
  std::shared_ptr<Channel> ch;
  if (endpoint.rfind("mem://", 0) == 0) {
    ch = std::make_shared<LoopbackChannel>(LoopbackRegistry::instance().lookup(endpoint.substr(6)));
  } else {
    auto [host, port] = parse_host_port(endpoint);
    ch = std::make_shared<TcpChannel>(host, port);
  }
  std::shared_ptr<Channel> exposed = ch;
  if (model_.enabled()) {
    auto link = link_;
    exposed = std::make_shared<ShapedChannel>(
        ch, link, [link](std::size_t bytes) { return link->reserve(bytes); }, model_.latency);
  }
  channels_[endpoint] = Cached{ch, exposed};
  return exposed;
}

}  // namespace vblob::rpc
