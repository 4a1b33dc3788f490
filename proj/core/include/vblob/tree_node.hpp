#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vblob/types.hpp"

namespace vblob {

/// Identifies a metadata tree node. Any party can compute it from
/// (blob, version, position), which is what lets a writer wait for a node
/// that a concurrent writer has not stored yet.
struct NodeKey {
  BlobId blob;
  Version version = 0;
  NodePos pos;

  static constexpr std::size_t kEncodedSize = 40;

  /// blob(16) version(u64) offset(u64) size(u64), big-endian.
  Bytes encode() const;
  static NodeKey decode(std::span<const std::uint8_t> bytes);

  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
};

/// A sub-page extent of a leaf, pointing into a stored page object.
struct Fragment {
  std::uint32_t page_off = 0;
  std::uint32_t len = 0;
  PageId pid;
  std::string provider;
  std::uint32_t src_off = 0;

  std::uint32_t page_end() const noexcept { return page_off + len; }
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct InnerNode {
  Version left = kNoVersion;
  Version right = kNoVersion;
  friend bool operator==(const InnerNode&, const InnerNode&) = default;
};

struct LeafNode {
  /// Disjoint, sorted by page_off.
  std::vector<Fragment> fragments;
  friend bool operator==(const LeafNode&, const LeafNode&) = default;
};

/// Immutable segment tree node: inner nodes carry child versions, leaves
/// carry the fragments that make up one page of a snapshot.
struct TreeNode {
  std::variant<InnerNode, LeafNode> body;

  static TreeNode inner(Version left, Version right) { return {InnerNode{left, right}}; }
  static TreeNode leaf(std::vector<Fragment> fragments) { return {LeafNode{std::move(fragments)}}; }

  bool is_leaf() const noexcept { return std::holds_alternative<LeafNode>(body); }
  const InnerNode& as_inner() const { return std::get<InnerNode>(body); }
  const LeafNode& as_leaf() const { return std::get<LeafNode>(body); }

  /// Canonical encoding. Tag byte 0 = inner: two u64 child versions
  /// (2^64-1 = none). Tag byte 1 = leaf: u16 fragment count, then per
  /// fragment page_off(u32) len(u32) pid(16) provider(u16-prefixed) src_off(u32).
  Bytes encode() const;
  /// Throws Errc::Malformed on bytes that are not a valid canonical node.
  static TreeNode decode(std::span<const std::uint8_t> bytes);

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Checks node invariants; throws Errc::InvalidArgument when violated.
void validate(const TreeNode& node);

std::string to_string(const NodeKey& key);

}  // namespace vblob
