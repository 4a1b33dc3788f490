#include "vblob/segtree.hpp"

#include <algorithm>
#include <atomic>

#include "vblob/error.hpp"
#include "vblob/parallel.hpp"

namespace vblob {

BlobId Lineage::resolve(Version v) const {
  for (std::size_t i = 0; i + 1 < links_.size(); ++i) {
    if (v > links_[i].fork) return links_[i].blob;
  }
  return links_.back().blob;
}

namespace {

NodeKey key_for(const TreeContext& ctx, Version v, const NodePos& pos) {
  return NodeKey{ctx.lineage.resolve(v), v, pos};
}

struct Pending {
  NodePos pos;
  Version version;
};

}  // namespace

std::vector<PageExtent> read_meta(const TreeContext& ctx, Version v, const ByteRange& range,
                                  std::uint64_t size_v, ReadStats* stats) {
  if (range.size == 0) return {};
  if (range.end() > size_v) raise(Errc::InvalidArgument, "read_meta range beyond snapshot size");
  if (v == 0) raise(Errc::InvalidArgument, "version 0 has no tree");

  const auto span = page_span(range, ctx.psize);
  const auto root = NodePos{0, root_cover(page_count(size_v, ctx.psize))};
  std::vector<PageExtent> out;
  std::mutex out_mu;
  std::atomic<std::size_t> fetches{0};

  std::vector<Pending> level{{root, v}};
  while (!level.empty()) {
    std::vector<std::vector<Pending>> next(level.size());
    parallel_for(level.size(), [&](std::size_t i) {
      const auto& [pos, ver] = level[i];
      auto node = ctx.store.get_node(key_for(ctx, ver, pos));
      ++fetches;
      if (node.is_leaf()) {
        if (!pos.is_leaf()) raise(Errc::Internal, "leaf stored at inner position " + to_string(pos));
        const std::uint64_t page_base = pos.offset * ctx.psize;
        std::vector<PageExtent> local;
        for (const auto& f : node.as_leaf().fragments) {
          std::uint64_t lo = std::max(page_base + f.page_off, range.offset);
          std::uint64_t hi = std::min(page_base + f.page_end(), range.end());
          if (lo >= hi) continue;
          local.push_back(PageExtent{f.pid, f.provider, f.src_off + (lo - page_base - f.page_off), hi - lo, lo,
                                     pos.offset});
        }
        std::lock_guard lock(out_mu);
        out.insert(out.end(), local.begin(), local.end());
        return;
      }
      if (pos.is_leaf()) raise(Errc::Internal, "inner node stored at leaf position " + to_string(pos));
      const auto& in = node.as_inner();
      for (auto [child, link] : {std::pair{pos.left(), in.left}, std::pair{pos.right(), in.right}}) {
        if (!intersects(child, span)) continue;
        if (link == kNoVersion) raise(Errc::Internal, "tree hole at " + to_string(child));
        next[i].push_back({child, link});
      }
    });
    level.clear();
    for (auto& n : next) level.insert(level.end(), n.begin(), n.end());
  }

  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.blob_offset < b.blob_offset; });
  std::uint64_t cursor = range.offset;
  for (const auto& e : out) {
    if (e.blob_offset != cursor) raise(Errc::Internal, "metadata does not tile the requested range");
    cursor += e.len;
  }
  if (cursor != range.end()) raise(Errc::Internal, "metadata does not cover the requested range");
  if (stats) stats->node_fetches += fetches.load();
  return out;
}

BorderResolver::BorderResolver(const TreeContext& ctx, const WriteTicket& ticket)
    : ctx_(ctx), ticket_(ticket), vp_root_(root_cover(page_count(ticket.vp_size, ctx.psize))) {
  if (ticket_.vp != 0 && vp_root_ != 0) known_[NodePos{0, vp_root_}] = ticket_.vp;
}

Version BorderResolver::published_version_at(const NodePos& pos) {
  if (ticket_.vp == 0 || vp_root_ == 0 || pos.end() > vp_root_) return kNoVersion;
  if (auto it = known_.find(pos); it != known_.end()) return it->second;
  NodePos cur{0, vp_root_};
  Version ver = ticket_.vp;
  while (cur != pos) {
    NodePos child = pos.offset < cur.offset + cur.size / 2 ? cur.left() : cur.right();
    if (auto it = known_.find(child); it != known_.end()) {
      ver = it->second;
    } else {
      auto node = ctx_.store.get_node(key_for(ctx_, ver, cur));
      if (node.is_leaf()) raise(Errc::Internal, "leaf stored at inner position " + to_string(cur));
      known_[cur.left()] = node.as_inner().left;
      known_[cur.right()] = node.as_inner().right;
      ver = known_[child];
    }
    if (ver == kNoVersion) return kNoVersion;
    cur = child;
  }
  return ver;
}

Version BorderResolver::version_at(const NodePos& pos) {
  Version best = published_version_at(pos);
  if (ctx_.skip_concurrent_overlay) return best;
  for (const auto& w : ticket_.concurrent) {
    if (pos.end() > w.root_pages) continue;
    if (!intersects(pos, page_span(w.range, ctx_.psize))) continue;
    if (best == kNoVersion || w.version > best) best = w.version;
  }
  return best;
}

std::vector<NodePos> sibling_positions(const PageSpan& update, std::uint64_t root_pages) {
  std::vector<NodePos> out;
  if (update.count == 0) return out;
  for (std::uint64_t s = 2; s <= root_pages; s *= 2) {
    for (std::uint64_t off = update.first / s * s; off < update.end(); off += s) {
      NodePos p{off, s};
      for (auto child : {p.left(), p.right()}) {
        if (!intersects(child, update)) out.push_back(child);
      }
    }
  }
  return out;
}

BorderMap border_versions(const TreeContext& ctx, const PageSpan& update, std::uint64_t root_pages,
                          const WriteTicket& ticket) {
  BorderResolver resolver(ctx, ticket);
  BorderMap out;
  for (const auto& q : sibling_positions(update, root_pages)) out[q] = resolver.version_at(q);
  return out;
}

std::vector<Fragment> overlay_fragments(const std::vector<Fragment>& prev, const std::vector<Fragment>& new_frags) {
  if (new_frags.empty()) return prev;
  const std::uint32_t lo = new_frags.front().page_off;
  const std::uint32_t hi = new_frags.back().page_end();
  std::vector<Fragment> out;
  auto clip = [&](std::uint32_t from, std::uint32_t to) {
    for (const auto& f : prev) {
      std::uint32_t a = std::max(f.page_off, from);
      std::uint32_t b = std::min(f.page_end(), to);
      if (a >= b) continue;
      Fragment c = f;
      c.src_off = f.src_off + (a - f.page_off);
      c.page_off = a;
      c.len = b - a;
      out.push_back(std::move(c));
    }
  };
  clip(0, lo);
  out.insert(out.end(), new_frags.begin(), new_frags.end());
  clip(hi, std::numeric_limits<std::uint32_t>::max());
  return out;
}

TreeNode materialize_boundary_leaf(const TreeContext& ctx, std::uint64_t page, std::vector<Fragment> new_frags,
                                   Version prev_version) {
  if (new_frags.empty()) raise(Errc::InvalidArgument, "boundary leaf without new fragments");
  if (new_frags.back().page_end() > ctx.psize) raise(Errc::InvalidArgument, "fragment beyond page size");
  if (prev_version == kNoVersion) return TreeNode::leaf(std::move(new_frags));
  auto prev = ctx.store.get_node_wait(key_for(ctx, prev_version, NodePos{page, 1}), ctx.wait);
  if (!prev.is_leaf()) raise(Errc::Internal, "predecessor of page " + std::to_string(page) + " is not a leaf");
  return TreeNode::leaf(overlay_fragments(prev.as_leaf().fragments, new_frags));
}

BuildResult build_meta(const TreeContext& ctx, const WriteTicket& ticket, const ByteRange& range,
                       std::span<const PageDescriptor> pd) {
  if (range.size == 0) raise(Errc::InvalidArgument, "empty update");
  const auto psize = ctx.psize;
  const auto span = page_span(range, psize);
  const auto new_size = std::max(ticket.prev_size, range.end());
  const auto root_pages = root_cover(page_count(new_size, psize));
  const BlobId owner = ctx.lineage.self();

  std::vector<std::vector<Fragment>> per_page(span.count);
  for (const auto& d : pd) {
    if (d.index >= span.count) raise(Errc::InvalidArgument, "page descriptor outside the update");
    per_page[d.index].push_back(Fragment{d.page_off, d.len, d.pid, d.provider, d.src_off});
  }

  BorderResolver resolver(ctx, ticket);
  std::vector<std::pair<NodeKey, TreeNode>> nodes;
  nodes.reserve(span.count + 2 * 64);

  for (std::uint64_t i = 0; i < span.count; ++i) {
    auto& frags = per_page[i];
    std::sort(frags.begin(), frags.end(), [](const auto& a, const auto& b) { return a.page_off < b.page_off; });
    if (frags.empty()) raise(Errc::InvalidArgument, "update page without descriptor");
    for (std::size_t j = 1; j < frags.size(); ++j) {
      if (frags[j].page_off != frags[j - 1].page_end()) raise(Errc::InvalidArgument, "update fragments not contiguous");
    }
    const std::uint64_t page = span.first + i;
    const std::uint64_t page_base = page * psize;
    // Predecessor bytes survive only where the previous snapshot had data
    // on this page outside the new extent.
    const std::uint64_t prev_in_page =
        ticket.prev_size > page_base ? std::min(psize, ticket.prev_size - page_base) : 0;
    const bool needs_prev = frags.front().page_off > 0 || frags.back().page_end() < prev_in_page;
    NodePos pos{page, 1};
    if (needs_prev) {
      nodes.emplace_back(NodeKey{owner, ticket.vw, pos},
                         materialize_boundary_leaf(ctx, page, std::move(frags), resolver.version_at(pos)));
    } else {
      nodes.emplace_back(NodeKey{owner, ticket.vw, pos}, TreeNode::leaf(std::move(frags)));
    }
  }

  for (std::uint64_t s = 2; s <= root_pages; s *= 2) {
    for (std::uint64_t off = span.first / s * s; off < span.end(); off += s) {
      NodePos p{off, s};
      auto link = [&](const NodePos& child) {
        return intersects(child, span) ? ticket.vw : resolver.version_at(child);
      };
      nodes.emplace_back(NodeKey{owner, ticket.vw, p}, TreeNode::inner(link(p.left()), link(p.right())));
    }
  }

  parallel_for(nodes.size(), [&](std::size_t i) { ctx.store.put_node(nodes[i].first, nodes[i].second); });

  BuildResult result;
  result.keys.reserve(nodes.size());
  for (auto& [k, n] : nodes) result.keys.push_back(k);
  return result;
}

}  // namespace vblob
