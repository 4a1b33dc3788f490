#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vblob/metastore.hpp"
#include "vblob/rpc/stubs.hpp"
#include "vblob/rpc/transport.hpp"
#include "vblob/segtree.hpp"
#include "vblob/types.hpp"

namespace vblob {

/// Where the services of one deployment live.
struct ClusterConfig {
  std::string versioner;
  std::string allocator;
  std::vector<std::string> metastores;
};

struct ClientOptions {
  /// Waiting for a concurrent writer's boundary leaf.
  WaitPolicy wait{};
  /// Emulated network link of this client.
  rpc::LinkModel link{};
  /// Mutation-test hook; see TreeContext.
  bool skip_concurrent_overlay = false;
};

/// A blob as seen by a client. psize is fixed at creation; branches inherit it.
struct BlobHandle {
  BlobId id;
  std::uint64_t psize = 0;
  Lineage lineage;
};

/// The public blob API. A Client may be shared by any number of threads;
/// each operation fans out over pages internally.
class Client {
 public:
  explicit Client(ClusterConfig cluster, ClientOptions options = {},
                  std::shared_ptr<rpc::Connector> connector = nullptr);

  /// Errc::BadPageSize unless psize is a power of two <= kMaxPageSize.
  BlobHandle create(std::uint64_t psize);
  BlobHandle open(const BlobId& id);

  /// Fills buffer with bytes [offset, offset + buffer.size()) of snapshot v.
  /// Errc::NotPublished, Errc::OutOfBounds.
  void read(const BlobHandle& h, Version v, std::span<std::uint8_t> buffer, std::uint64_t offset);
  Bytes read(const BlobHandle& h, Version v, std::uint64_t offset, std::uint64_t size);

  /// Returns the assigned version, possibly before it is published.
  /// Errc::OffsetBeyondEnd, Errc::NoProviders, Errc::StoreFull, Errc::Timeout.
  Version write(const BlobHandle& h, std::span<const std::uint8_t> data, std::uint64_t offset);
  Version append(const BlobHandle& h, std::span<const std::uint8_t> data);

  void sync(const BlobHandle& h, Version v, std::optional<std::chrono::milliseconds> timeout = std::nullopt);
  Version get_recent(const BlobHandle& h);
  std::uint64_t get_size(const BlobHandle& h, Version v);
  BlobHandle branch(const BlobHandle& h, Version v);

  /// Metadata lookup only; exposed for diagnostics and tests.
  std::vector<PageExtent> locate(const BlobHandle& h, Version v, std::uint64_t offset, std::uint64_t size,
                                 ReadStats* stats = nullptr);

  NodeStore& node_store() { return *dht_; }
  rpc::RemoteVersionManager& version_manager() { return vm_; }

 private:
  Version update(const BlobHandle& h, UpdateKind kind, std::optional<std::uint64_t> offset,
                 std::span<const std::uint8_t> data);
  rpc::RemotePageStore provider(const std::string& addr);
  TreeContext context(const BlobHandle& h) const;

  ClusterConfig cluster_;
  ClientOptions options_;
  std::shared_ptr<rpc::Connector> connector_;
  rpc::RemoteVersionManager vm_;
  rpc::RemoteProviderManager pm_;
  std::shared_ptr<DhtNodeStore> dht_;
};

}  // namespace vblob
