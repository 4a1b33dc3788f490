#include "vblob/types.hpp"

#include <bit>
#include <cstdio>
#include <random>

#include "vblob/error.hpp"

namespace vblob {

namespace {

std::uint64_t random_u64() {
  thread_local std::mt19937_64 rng = [] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }();
  return rng();
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

template <typename Tag>
Id128<Tag> Id128<Tag>::random() {
  Id128 id;
  do {
    id.hi = random_u64();
    id.lo = random_u64();
  } while (id.is_nil());
  return id;
}

template <typename Tag>
std::string Id128<Tag>::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return std::string(buf, 32);
}

template <typename Tag>
Id128<Tag> Id128<Tag>::from_hex(std::string_view text) {
  if (text.size() != 32) raise(Errc::InvalidArgument, "identifier must be 32 hex characters");
  Id128 id;
  for (std::size_t i = 0; i < 32; ++i) {
    int d = hex_digit(text[i]);
    if (d < 0) raise(Errc::InvalidArgument, "identifier is not hexadecimal");
    std::uint64_t& word = i < 16 ? id.hi : id.lo;
    word = (word << 4) | static_cast<std::uint64_t>(d);
  }
  return id;
}

template struct Id128<BlobTag>;
template struct Id128<PageTag>;

bool NodePos::valid() const noexcept {
  return size != 0 && is_power_of_two(size) && offset % size == 0;
}

bool intersects(const ByteRange& a, const ByteRange& b) noexcept {
  return a.size != 0 && b.size != 0 && a.offset < b.end() && b.offset < a.end();
}

bool intersects(const NodePos& a, const NodePos& b) noexcept {
  return a.size != 0 && b.size != 0 && a.offset < b.end() && b.offset < a.end();
}

bool intersects(const NodePos& a, const PageSpan& b) noexcept {
  return a.size != 0 && b.count != 0 && a.offset < b.end() && b.first < a.end();
}

bool is_power_of_two(std::uint64_t x) noexcept { return std::has_single_bit(x); }

PageSpan page_span(const ByteRange& r, std::uint64_t psize) noexcept {
  std::uint64_t first = r.offset / psize;
  if (r.size == 0) return {first, 0};
  std::uint64_t last = (r.end() - 1) / psize;
  return {first, last - first + 1};
}

std::uint64_t page_count(std::uint64_t size_bytes, std::uint64_t psize) noexcept {
  return (size_bytes + psize - 1) / psize;
}

std::uint64_t root_cover(std::uint64_t n_pages) noexcept {
  if (n_pages == 0) return 0;
  return std::bit_ceil(n_pages);
}

ParentLink parent_of(const NodePos& p) noexcept {
  if (p.offset % (2 * p.size) == 0) return {{p.offset, 2 * p.size}, Side::Left};
  return {{p.offset - p.size, 2 * p.size}, Side::Right};
}

std::string to_string(const NodePos& p) {
  return "(" + std::to_string(p.offset) + "," + std::to_string(p.size) + ")";
}

std::string to_string(const ByteRange& r) {
  return "[" + std::to_string(r.offset) + "+" + std::to_string(r.size) + ")";
}

}  // namespace vblob
