#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vblob/metastore.hpp"
#include "vblob/pagestore.hpp"
#include "vblob/rpc/transport.hpp"
#include "vblob/versioner.hpp"

namespace vblob::rpc {

/// Client stubs for each role. They mirror the local classes' contracts and
/// rethrow remote errors with their original codes.

class RemotePageStore {
 public:
  explicit RemotePageStore(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}

  void put_page(const PageId& pid, Bytes bytes);
  Bytes get_page(const PageId& pid, std::uint64_t off, std::uint64_t len);
  /// get_page decoding straight into dst (dst.size() is the length).
  void read_into(const PageId& pid, std::uint64_t off, std::span<std::uint8_t> dst);
  PageUsage usage();

 private:
  std::shared_ptr<Channel> ch_;
};

class RemoteMetaStore final : public NodeStore {
 public:
  explicit RemoteMetaStore(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}

  void put_node(const NodeKey& key, const TreeNode& node) override;
  std::optional<TreeNode> find_node(const NodeKey& key) override;

 private:
  std::shared_ptr<Channel> ch_;
};

class RemoteProviderManager {
 public:
  explicit RemoteProviderManager(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}

  void register_provider(const std::string& addr);
  std::vector<std::string> allocate(std::size_t n);
  void report(const std::string& addr, std::uint64_t pages);

 private:
  std::shared_ptr<Channel> ch_;
};

class RemoteVersionManager {
 public:
  explicit RemoteVersionManager(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}

  BlobId create_blob(std::uint64_t psize);
  WriteTicket assign_version(const BlobId& blob, UpdateKind kind, std::optional<std::uint64_t> offset,
                             std::uint64_t size);
  void notify_success(const BlobId& blob, Version v);
  Version get_recent(const BlobId& blob);
  std::uint64_t get_size(const BlobId& blob, Version v);
  void wait_published(const BlobId& blob, Version v, std::optional<std::chrono::milliseconds> timeout);
  BlobId branch(const BlobId& blob, Version v);
  BlobInfo info(const BlobId& blob);

 private:
  std::shared_ptr<Channel> ch_;
};

}  // namespace vblob::rpc
