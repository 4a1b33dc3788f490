#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "vblob/error.hpp"
#include "vblob/types.hpp"

namespace vblob {

/// Appends big-endian fields to a byte buffer.
class WireWriter {
 public:
  explicit WireWriter(Bytes& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put_be(v, 2); }
  void u32(std::uint32_t v) { put_be(v, 4); }
  void u64(std::uint64_t v) { put_be(v, 8); }

  template <typename Tag>
  void id(const Id128<Tag>& v) {
    u64(v.hi);
    u64(v.lo);
  }

  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

  /// u32 length prefix followed by the bytes.
  void blob(std::span<const std::uint8_t> bytes);
  void str32(std::string_view s);
  /// u16 length prefix; used for provider addresses inside tree nodes.
  void str16(std::string_view s);

 private:
  void put_be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes& out_;
};

/// Consumes big-endian fields; throws Errc::Malformed on truncation.
class WireReader {
 public:
  explicit WireReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_be(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_be(4)); }
  std::uint64_t u64() { return get_be(8); }

  template <typename Tag>
  Id128<Tag> id() {
    Id128<Tag> v;
    v.hi = u64();
    v.lo = u64();
    return v;
  }

  std::span<const std::uint8_t> raw(std::size_t n);
  Bytes blob();
  std::string str32();
  std::string str16();

  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  /// Throws Malformed unless every byte was consumed.
  void expect_end() const;

 private:
  std::uint64_t get_be(int width);

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace vblob
