#include "vblob/rpc/frame.hpp"

#include "vblob/error.hpp"
#include "vblob/wire.hpp"

namespace vblob::rpc {

Bytes encode_frame(const Frame& frame) {
  const std::uint64_t length = kFrameHeaderLength + frame.body.size();
  if (length > kMaxFrameLength) raise(Errc::InvalidArgument, "frame exceeds 16 MiB");
  Bytes out;
  out.reserve(4 + length);
  WireWriter w(out);
  w.u32(static_cast<std::uint32_t>(length));
  w.u8(static_cast<std::uint8_t>(frame.opcode));
  w.u64(frame.request_id);
  w.raw(frame.body);
  return out;
}

std::optional<std::uint32_t> peek_length(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) return std::nullopt;
  WireReader r(bytes.first(4));
  return r.u32();
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  WireReader r(bytes);
  auto length = r.u32();
  if (length < kFrameHeaderLength || length > kMaxFrameLength) raise(Errc::Malformed, "bad frame length");
  if (r.remaining() != length) raise(Errc::Malformed, "frame length does not match payload");
  Frame f;
  f.opcode = static_cast<Opcode>(r.u8());
  f.request_id = r.u64();
  auto body = r.raw(r.remaining());
  f.body.assign(body.begin(), body.end());
  return f;
}

}  // namespace vblob::rpc
