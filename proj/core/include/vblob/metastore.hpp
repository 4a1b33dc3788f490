#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "vblob/tree_node.hpp"

namespace vblob {

/// Bounded polling used when waiting for a node a concurrent writer will store.
struct WaitPolicy {
  std::chrono::milliseconds timeout{10'000};
  std::chrono::milliseconds interval{5};
};

/// Access to write-once tree nodes. Implemented by a single in-memory store,
/// by the remote stub, and by the DHT that spreads keys over many stores.
class NodeStore {
 public:
  virtual ~NodeStore() = default;

  /// Idempotent on byte-identical payloads; Errc::Conflict otherwise.
  virtual void put_node(const NodeKey& key, const TreeNode& node) = 0;
  virtual std::optional<TreeNode> find_node(const NodeKey& key) = 0;

  /// Errc::NotFound when absent.
  TreeNode get_node(const NodeKey& key);
  /// Polls until the node appears; Errc::Timeout after the deadline.
  virtual TreeNode get_node_wait(const NodeKey& key, const WaitPolicy& policy);
};

/// One metadata provider: immutable nodes stored under their canonical
/// encoding, so idempotency is byte equality.
class MetaStore final : public NodeStore {
 public:
  void put_node(const NodeKey& key, const TreeNode& node) override;
  std::optional<TreeNode> find_node(const NodeKey& key) override;

  /// Wire-level entry points; the payload must decode as a valid node.
  void put_encoded(const NodeKey& key, const Bytes& encoded);
  std::optional<Bytes> get_encoded(const NodeKey& key) const;

  std::size_t node_count() const;
  /// Copy of every stored node, ordered by key.
  std::map<NodeKey, Bytes> dump() const;

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Bytes> nodes_;
};

/// Stable 64-bit hash of a key: FNV-1a over the 40-byte canonical key
/// encoding, finished with the splitmix64 mixer.
std::uint64_t key_hash(const NodeKey& key) noexcept;

/// Static placement: key_hash(key) mod n_stores.
std::size_t locate(const NodeKey& key, std::size_t n_stores);

/// Distributed node store over a fixed set of shards.
class DhtNodeStore final : public NodeStore {
 public:
  explicit DhtNodeStore(std::vector<std::shared_ptr<NodeStore>> shards);

  void put_node(const NodeKey& key, const TreeNode& node) override;
  std::optional<TreeNode> find_node(const NodeKey& key) override;

  std::size_t shard_count() const noexcept { return shards_.size(); }

 private:
  NodeStore& shard_for(const NodeKey& key);

  std::vector<std::shared_ptr<NodeStore>> shards_;
};

}  // namespace vblob
