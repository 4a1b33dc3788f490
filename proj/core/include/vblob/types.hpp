#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace vblob {

using Bytes = std::vector<std::uint8_t>;

/// Snapshot version. Versions of a blob are assigned consecutively from 1;
/// version 0 is the empty snapshot every blob starts with.
using Version = std::uint64_t;

/// Marks an absent child link in an inner tree node.
inline constexpr Version kNoVersion = std::numeric_limits<Version>::max();

/// Largest supported page size. A PUT_PAGE frame carrying a full page has to
/// fit in the 16 MiB frame limit.
inline constexpr std::uint64_t kMaxPageSize = std::uint64_t{8} << 20;

/// 128-bit random identifier. Tagged so blob ids and page ids do not mix.
template <typename Tag>
struct Id128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  static Id128 random();

  bool is_nil() const noexcept { return hi == 0 && lo == 0; }
  std::string hex() const;
  static Id128 from_hex(std::string_view text);

  friend auto operator<=>(const Id128&, const Id128&) = default;
};

struct BlobTag {};
struct PageTag {};
using BlobId = Id128<BlobTag>;
using PageId = Id128<PageTag>;

/// Half-open byte interval [offset, offset + size).
struct ByteRange {
  std::uint64_t offset = 0;
  std::uint64_t size = 0;

  std::uint64_t end() const noexcept { return offset + size; }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

/// A segment-tree position in page units. size is a power of two and offset
/// a multiple of size.
struct NodePos {
  std::uint64_t offset = 0;
  std::uint64_t size = 0;

  std::uint64_t end() const noexcept { return offset + size; }
  bool is_leaf() const noexcept { return size == 1; }
  bool valid() const noexcept;
  NodePos left() const noexcept { return {offset, size / 2}; }
  NodePos right() const noexcept { return {offset + size / 2, size / 2}; }
  bool contains(const NodePos& other) const noexcept {
    return offset <= other.offset && other.end() <= end();
  }

  friend auto operator<=>(const NodePos&, const NodePos&) = default;
};

/// Contiguous page interval [first, first + count).
struct PageSpan {
  std::uint64_t first = 0;
  std::uint64_t count = 0;

  std::uint64_t end() const noexcept { return first + count; }
  friend bool operator==(const PageSpan&, const PageSpan&) = default;
};

enum class Side : std::uint8_t { Left, Right };

struct ParentLink {
  NodePos parent;
  Side side;
  friend bool operator==(const ParentLink&, const ParentLink&) = default;
};

bool intersects(const ByteRange& a, const ByteRange& b) noexcept;
bool intersects(const NodePos& a, const NodePos& b) noexcept;
bool intersects(const NodePos& a, const PageSpan& b) noexcept;

bool is_power_of_two(std::uint64_t x) noexcept;

/// Minimal page interval covering r. psize must be a power of two.
PageSpan page_span(const ByteRange& r, std::uint64_t psize) noexcept;

/// Number of pages holding a snapshot of the given byte size.
std::uint64_t page_count(std::uint64_t size_bytes, std::uint64_t psize) noexcept;

/// Smallest power of two >= n_pages; 0 for an empty blob.
std::uint64_t root_cover(std::uint64_t n_pages) noexcept;

ParentLink parent_of(const NodePos& p) noexcept;

std::string to_string(const NodePos& p);
std::string to_string(const ByteRange& r);

}  // namespace vblob

template <typename Tag>
struct std::hash<vblob::Id128<Tag>> {
  std::size_t operator()(const vblob::Id128<Tag>& id) const noexcept {
    return static_cast<std::size_t>(id.hi * 0x9e3779b97f4a7c15ULL ^ id.lo);
  }
};
