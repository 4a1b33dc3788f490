#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vblob/metastore.hpp"
#include "vblob/tree_node.hpp"
#include "vblob/types.hpp"
#include "vblob/versioner.hpp"

namespace vblob {

/// Branch ancestry of a blob: which blob's tree physically holds a version.
class Lineage {
 public:
  struct Link {
    BlobId blob;
    Version fork = 0;
  };

  Lineage() = default;
  explicit Lineage(BlobId self) : links_{{self, 0}} {}
  /// links[0] is the blob itself, each following entry its parent.
  explicit Lineage(std::vector<Link> links) : links_(std::move(links)) {}

  /// Walks parent links while v <= fork.
  BlobId resolve(Version v) const;
  const BlobId& self() const { return links_.front().blob; }
  const std::vector<Link>& links() const { return links_; }

 private:
  std::vector<Link> links_;
};

/// One stored fragment produced by an update, addressed by its page index
/// relative to the first page the update touches.
struct PageDescriptor {
  PageId pid;
  std::uint64_t index = 0;
  std::string provider;
  std::uint32_t page_off = 0;
  std::uint32_t len = 0;
  std::uint32_t src_off = 0;
};

/// A byte extent of a read, resolved to a stored page object.
struct PageExtent {
  PageId pid;
  std::string provider;
  std::uint64_t src_off = 0;
  std::uint64_t len = 0;
  std::uint64_t blob_offset = 0;
  std::uint64_t page = 0;
};

/// Child positions outside an update, mapped to the version whose node they
/// link to (kNoVersion where nothing was ever written).
using BorderMap = std::map<NodePos, Version>;

struct TreeContext {
  NodeStore& store;
  const Lineage& lineage;
  std::uint64_t psize;
  WaitPolicy wait{};
  /// Fault injection for mutation tests: ignore in-flight updates when
  /// computing border versions.
  bool skip_concurrent_overlay = false;
};

struct ReadStats {
  std::size_t node_fetches = 0;
};

/// Descends the tree of version v (snapshot size size_v) and returns the
/// extents that tile range exactly, ordered by blob offset.
std::vector<PageExtent> read_meta(const TreeContext& ctx, Version v, const ByteRange& range,
                                  std::uint64_t size_v, ReadStats* stats = nullptr);

/// Version of the node at pos in the tree of snapshot vw - 1, computed from
/// the published tree of ticket.vp overlaid with the ticket's in-flight updates.
class BorderResolver {
 public:
  BorderResolver(const TreeContext& ctx, const WriteTicket& ticket);

  Version version_at(const NodePos& pos);

 private:
  Version published_version_at(const NodePos& pos);

  const TreeContext& ctx_;
  const WriteTicket& ticket_;
  std::uint64_t vp_root_ = 0;
  std::map<NodePos, Version> known_;
};

/// Sibling positions needed to build the inner nodes of an update covering
/// `update` pages in a tree of root_pages.
std::vector<NodePos> sibling_positions(const PageSpan& update, std::uint64_t root_pages);

BorderMap border_versions(const TreeContext& ctx, const PageSpan& update, std::uint64_t root_pages,
                          const WriteTicket& ticket);

/// Overlays new_frags (contiguous, sorted) on the leaf of prev_version at
/// the same page, keeping only the predecessor's bytes outside new_frags.
TreeNode materialize_boundary_leaf(const TreeContext& ctx, std::uint64_t page, std::vector<Fragment> new_frags,
                                   Version prev_version);

/// Pure overlay step of materialize_boundary_leaf.
std::vector<Fragment> overlay_fragments(const std::vector<Fragment>& prev, const std::vector<Fragment>& new_frags);

struct BuildResult {
  std::vector<NodeKey> keys;
  std::size_t nodes_written() const { return keys.size(); }
};

/// Builds and stores the leaves and inner nodes of version ticket.vw for an
/// update over byte range `range` whose pages are described by pd.
BuildResult build_meta(const TreeContext& ctx, const WriteTicket& ticket, const ByteRange& range,
                       std::span<const PageDescriptor> pd);

}  // namespace vblob
