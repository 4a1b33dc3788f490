#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "vblob/rpc/messages.hpp"

namespace vblob::rpc {

using namespace std::chrono_literals;

inline constexpr std::chrono::milliseconds kDefaultCallTimeout = 30s;

/// Server side of the protocol. handle() never throws: failures become
/// ERROR frames.
class Service {
 public:
  virtual ~Service() = default;
  virtual Frame handle(const Frame& request) = 0;
};

/// Decodes requests and encodes replies around a typed handler.
class Dispatcher : public Service {
 public:
  Frame handle(const Frame& request) final;

 protected:
  /// Errc::Unsupported for opcodes the role does not serve.
  virtual Reply dispatch(const Request& request) = 0;
  /// Lets a role encode a reply itself, e.g. to avoid copying page data.
  /// Errors thrown here become ERROR frames as for dispatch().
  virtual std::optional<Frame> dispatch_frame(const Frame&) { return std::nullopt; }
};

/// Client side: one request, one matched reply.
class Channel {
 public:
  virtual ~Channel() = default;
  /// Assigns the request id. Errc::Timeout, Errc::Connection.
  virtual Frame roundtrip(Frame request, std::chrono::milliseconds timeout) = 0;
};

/// Hands the request frame to the service in the caller's thread. Bodies use
/// the wire encoding; the length prefix is never written. Per-call timeouts
/// are not enforced: blocking requests carry their own deadline.
class LoopbackChannel final : public Channel {
 public:
  explicit LoopbackChannel(std::shared_ptr<Service> service) : service_(std::move(service)) {}
  Frame roundtrip(Frame request, std::chrono::milliseconds timeout) override;

 private:
  std::shared_ptr<Service> service_;
  std::atomic<std::uint64_t> next_id_{1};
};

/// Process-wide names for loopback endpoints ("mem://<name>").
class LoopbackRegistry {
 public:
  static LoopbackRegistry& instance();

  void bind(const std::string& name, std::shared_ptr<Service> service);
  void unbind(const std::string& name);
  /// Errc::Connection when nothing is bound.
  std::shared_ptr<Service> lookup(const std::string& name) const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<Service>> services_;
};

/// Multiplexed TCP client connection; replies are matched by request id.
class TcpChannel final : public Channel {
 public:
  /// Errc::Connection when the connect fails.
  TcpChannel(const std::string& host, std::uint16_t port);
  ~TcpChannel() override;

  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  Frame roundtrip(Frame request, std::chrono::milliseconds timeout) override;
  bool broken() const noexcept { return broken_.load(); }

 private:
  void read_loop();
  void fail_pending(const std::string& why);

  int fd_ = -1;
  std::atomic<bool> broken_{false};
  std::atomic<std::uint64_t> next_id_{1};
  std::mutex write_mu_;
  std::mutex pending_mu_;
  std::unordered_map<std::uint64_t, std::promise<Frame>> pending_;
  std::thread reader_;
};

/// Accepts connections and serves each request on its own thread, so a
/// parked WAIT_PUBLISHED never blocks other requests on the connection.
class TcpServer {
 public:
  /// port 0 picks an ephemeral port.
  TcpServer(std::shared_ptr<Service> service, const std::string& host, std::uint16_t port);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::string endpoint() const { return host_ + ":" + std::to_string(port_); }
  void stop();

 private:
  struct Connection;

  void accept_loop();
  void serve_connection(std::shared_ptr<Connection> conn);

  std::shared_ptr<Service> service_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex conns_mu_;
  std::vector<std::shared_ptr<Connection>> conns_;
  std::vector<std::thread> readers_;
};

/// Emulated network link shared by all channels of one client: transfers
/// are serialized at `bytes_per_second` and each call pays `latency`.
struct LinkModel {
  double bytes_per_second = 0;  // 0 disables bandwidth shaping
  std::chrono::microseconds latency{0};

  bool enabled() const noexcept { return bytes_per_second > 0 || latency.count() > 0; }
};

/// Resolves endpoint strings to channels: "mem://name" for loopback
/// services, "host:port" or "tcp://host:port" for TCP. Channels are cached.
class Connector {
 public:
  explicit Connector(LinkModel link = {});

  std::shared_ptr<Channel> channel(const std::string& endpoint);

 private:
  struct Link;
  struct Cached {
    std::shared_ptr<Channel> raw;
    std::shared_ptr<Channel> exposed;
  };

  LinkModel model_;
  std::shared_ptr<Link> link_;
  std::mutex mu_;
  std::unordered_map<std::string, Cached> channels_;
};

/// Splits "host:port" (optionally prefixed with tcp://).
std::pair<std::string, std::uint16_t> parse_host_port(const std::string& endpoint);

/// Typed request/reply; ERROR replies are rethrown as vblob::Error.
template <typename Req>
typename Req::Reply call(Channel& channel, const Req& request,
                         std::chrono::milliseconds timeout = kDefaultCallTimeout) {
  Frame reply = channel.roundtrip(request_frame(Request{request}, 0), timeout);
  Reply parsed = parse_reply(Req::kOp, reply);
  if (auto* err = std::get_if<ErrorReply>(&parsed)) throw Error(err->code, err->message);
  auto* ok = std::get_if<typename Req::Reply>(&parsed);
  if (!ok) raise(Errc::Malformed, "unexpected reply type");
  return std::move(*ok);
}

}  // namespace vblob::rpc
