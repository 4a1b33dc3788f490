#include "vblob/wire.hpp"

#include <limits>

namespace vblob {

void WireWriter::blob(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > std::numeric_limits<std::uint32_t>::max()) {
    raise(Errc::InvalidArgument, "byte string too long for u32 prefix");
  }
  u32(static_cast<std::uint32_t>(bytes.size()));
  raw(bytes);
}

void WireWriter::str32(std::string_view s) {
  blob({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

void WireWriter::str16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    raise(Errc::InvalidArgument, "string too long for u16 prefix");
  }
  u16(static_cast<std::uint16_t>(s.size()));
  raw({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::span<const std::uint8_t> WireReader::raw(std::size_t n) {
  if (n > remaining()) raise(Errc::Malformed, "truncated field");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Bytes WireReader::blob() {
  auto n = u32();
  auto s = raw(n);
  return Bytes(s.begin(), s.end());
}

std::string WireReader::str32() {
  auto n = u32();
  auto s = raw(n);
  return std::string(s.begin(), s.end());
}

std::string WireReader::str16() {
  auto n = u16();
  auto s = raw(n);
  return std::string(s.begin(), s.end());
}

void WireReader::expect_end() const {
  if (remaining() != 0) raise(Errc::Malformed, "trailing bytes");
}

std::uint64_t WireReader::get_be(int width) {
  auto s = raw(static_cast<std::size_t>(width));
  std::uint64_t v = 0;
  for (auto b : s) v = (v << 8) | b;
  return v;
}

}  // namespace vblob
