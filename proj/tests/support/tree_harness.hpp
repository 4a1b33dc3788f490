#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "vblob/metastore.hpp"
#include "vblob/segtree.hpp"
#include "vblob/versioner.hpp"

namespace vblob::testing {

/// The tree engine wired to a version manager and a node store, with
/// synthetic page ids: pid {vw, page} for every page an update touches.
/// Nodes go to a private MetaStore unless an external store is given, in
/// which case `dump` must list what that store holds.
class TreeHarness {
 public:
  using DumpFn = std::function<std::map<NodeKey, Bytes>()>;

  explicit TreeHarness(std::uint64_t psize, NodeStore* external = nullptr, DumpFn dump = {});

  TreeContext ctx(bool skip_overlay = false);

  WriteTicket assign(UpdateKind kind, std::optional<std::uint64_t> offset, std::uint64_t size);
  /// One descriptor per touched page, clipped to the update range.
  std::vector<PageDescriptor> descriptors(const WriteTicket& t, std::uint64_t size) const;
  BuildResult build(const WriteTicket& t, std::uint64_t size, bool skip_overlay = false);
  void publish(Version v) { vm.notify_success(blob, v); }
  /// assign + build + publish.
  Version update(UpdateKind kind, std::optional<std::uint64_t> offset, std::uint64_t size);

  std::vector<PageExtent> read(Version v, const ByteRange& r, ReadStats* stats = nullptr);
  std::uint64_t size(Version v) const { return vm.get_size(blob, v); }

  /// Stored nodes of this blob's version v keyed by position.
  std::map<NodePos, TreeNode> nodes_of(Version v) const;
  std::map<std::pair<Version, NodePos>, Bytes> all_nodes() const;

  static PageId pid_for(Version v, std::uint64_t page) { return PageId{v, page}; }

  std::uint64_t psize;
  MetaStore local;
  NodeStore& store;
  DumpFn dump;
  VersionManager vm;
  BlobId blob;
  Lineage lineage;
  WaitPolicy wait{std::chrono::milliseconds(5'000), std::chrono::milliseconds(1)};
};

}  // namespace vblob::testing
