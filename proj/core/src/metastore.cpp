#include "vblob/metastore.hpp"

#include <mutex>
#include <thread>

#include "vblob/error.hpp"

namespace vblob {

namespace {

std::string key_string(const NodeKey& key) {
  auto b = key.encode();
  return std::string(b.begin(), b.end());
}

}  // namespace

TreeNode NodeStore::get_node(const NodeKey& key) {
  auto node = find_node(key);
  if (!node) raise(Errc::NotFound, "no node " + to_string(key));
  return *std::move(node);
}

TreeNode NodeStore::get_node_wait(const NodeKey& key, const WaitPolicy& policy) {
  auto deadline = std::chrono::steady_clock::now() + policy.timeout;
  for (;;) {
    if (auto node = find_node(key)) return *std::move(node);
    if (std::chrono::steady_clock::now() >= deadline) {
      raise(Errc::Timeout, "node " + to_string(key) + " never appeared");
    }
    std::this_thread::sleep_for(policy.interval);
  }
}

void MetaStore::put_node(const NodeKey& key, const TreeNode& node) {
  put_encoded(key, node.encode());
}

std::optional<TreeNode> MetaStore::find_node(const NodeKey& key) {
  auto bytes = get_encoded(key);
  if (!bytes) return std::nullopt;
  return TreeNode::decode(*bytes);
}

void MetaStore::put_encoded(const NodeKey& key, const Bytes& encoded) {
  TreeNode::decode(encoded);
  auto k = key_string(key);
  std::unique_lock lock(mu_);
  auto [it, inserted] = nodes_.try_emplace(std::move(k), encoded);
  if (!inserted && it->second != encoded) {
    raise(Errc::Conflict, "different node already stored at " + to_string(key));
  }
}

std::optional<Bytes> MetaStore::get_encoded(const NodeKey& key) const {
  auto k = key_string(key);
  std::shared_lock lock(mu_);
  auto it = nodes_.find(k);
  if (it == nodes_.end()) return std::nullopt;
  return it->second;
}

std::size_t MetaStore::node_count() const {
  std::shared_lock lock(mu_);
  return nodes_.size();
}

std::map<NodeKey, Bytes> MetaStore::dump() const {
  std::shared_lock lock(mu_);
  std::map<NodeKey, Bytes> out;
  for (const auto& [k, v] : nodes_) {
    out.emplace(NodeKey::decode({reinterpret_cast<const std::uint8_t*>(k.data()), k.size()}), v);
  }
  return out;
}

std::uint64_t key_hash(const NodeKey& key) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : key.encode()) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

std::size_t locate(const NodeKey& key, std::size_t n_stores) {
  if (n_stores == 0) raise(Errc::InvalidArgument, "locate needs at least one store");
  return static_cast<std::size_t>(key_hash(key) % n_stores);
}

DhtNodeStore::DhtNodeStore(std::vector<std::shared_ptr<NodeStore>> shards)
    : shards_(std::move(shards)) {
  if (shards_.empty()) raise(Errc::InvalidArgument, "DHT needs at least one metadata store");
}

NodeStore& DhtNodeStore::shard_for(const NodeKey& key) { return *shards_[locate(key, shards_.size())]; }

void DhtNodeStore::put_node(const NodeKey& key, const TreeNode& node) { shard_for(key).put_node(key, node); }

std::optional<TreeNode> DhtNodeStore::find_node(const NodeKey& key) { return shard_for(key).find_node(key); }

}  // namespace vblob
