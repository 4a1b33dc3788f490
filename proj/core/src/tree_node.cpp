#include "vblob/tree_node.hpp"

#include <limits>

#include "vblob/error.hpp"
#include "vblob/wire.hpp"

namespace vblob {

namespace {
constexpr std::uint8_t kInnerTag = 0;
constexpr std::uint8_t kLeafTag = 1;
}  // namespace

Bytes NodeKey::encode() const {
  Bytes out;
  out.reserve(kEncodedSize);
  WireWriter w(out);
  w.id(blob);
  w.u64(version);
  w.u64(pos.offset);
  w.u64(pos.size);
  return out;
}

NodeKey NodeKey::decode(std::span<const std::uint8_t> bytes) {
  WireReader r(bytes);
  NodeKey key;
  key.blob = r.id<BlobTag>();
  key.version = r.u64();
  key.pos.offset = r.u64();
  key.pos.size = r.u64();
  r.expect_end();
  if (!key.pos.valid()) raise(Errc::Malformed, "node key position is not aligned");
  return key;
}

void validate(const TreeNode& node) {
  if (!node.is_leaf()) {
    const auto& in = node.as_inner();
    if (in.left == kNoVersion && in.right == kNoVersion) {
      raise(Errc::InvalidArgument, "inner node without children");
    }
    return;
  }
  const auto& frags = node.as_leaf().fragments;
  if (frags.empty()) raise(Errc::InvalidArgument, "leaf without fragments");
  if (frags.size() > std::numeric_limits<std::uint16_t>::max()) {
    raise(Errc::InvalidArgument, "too many fragments");
  }
  std::uint64_t prev_end = 0;
  for (const auto& f : frags) {
    if (f.len == 0) raise(Errc::InvalidArgument, "empty fragment");
    if (f.page_off < prev_end) raise(Errc::InvalidArgument, "fragments overlap or are unsorted");
    prev_end = std::uint64_t{f.page_off} + f.len;
    if (prev_end > std::numeric_limits<std::uint32_t>::max()) {
      raise(Errc::InvalidArgument, "fragment beyond page");
    }
  }
}

Bytes TreeNode::encode() const {
  validate(*this);
  Bytes out;
  WireWriter w(out);
  if (!is_leaf()) {
    w.u8(kInnerTag);
    w.u64(as_inner().left);
    w.u64(as_inner().right);
    return out;
  }
  const auto& frags = as_leaf().fragments;
  w.u8(kLeafTag);
  w.u16(static_cast<std::uint16_t>(frags.size()));
  for (const auto& f : frags) {
    w.u32(f.page_off);
    w.u32(f.len);
    w.id(f.pid);
    w.str16(f.provider);
    w.u32(f.src_off);
  }
  return out;
}

TreeNode TreeNode::decode(std::span<const std::uint8_t> bytes) {
  WireReader r(bytes);
  TreeNode node;
  switch (r.u8()) {
    case kInnerTag: {
      auto left = r.u64();
      auto right = r.u64();
      node = inner(left, right);
      break;
    }
    case kLeafTag: {
      std::vector<Fragment> frags(r.u16());
      for (auto& f : frags) {
        f.page_off = r.u32();
        f.len = r.u32();
        f.pid = r.id<PageTag>();
        f.provider = r.str16();
        f.src_off = r.u32();
      }
      node = leaf(std::move(frags));
      break;
    }
    default:
      raise(Errc::Malformed, "unknown node tag");
  }
  r.expect_end();
  try {
    validate(node);
  } catch (const Error& e) {
    raise(Errc::Malformed, e.what());
  }
  return node;
}

std::string to_string(const NodeKey& key) {
  return key.blob.hex().substr(0, 8) + "@v" + std::to_string(key.version) + to_string(key.pos);
}

}  // namespace vblob
