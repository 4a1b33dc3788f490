#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "vblob/types.hpp"

namespace vblob::rpc {

enum class Opcode : std::uint8_t {
  PutPage = 1,
  GetPage = 2,
  Usage = 3,
  PutNode = 4,
  GetNode = 5,
  Register = 6,
  Allocate = 7,
  Report = 8,
  CreateBlob = 9,
  AssignVersion = 10,
  NotifySuccess = 11,
  GetRecent = 12,
  GetSize = 13,
  WaitPublished = 14,
  Branch = 15,
  BlobInfo = 16,
  Error = 127,
};

/// Largest accepted value of the length field.
inline constexpr std::uint32_t kMaxFrameLength = 16u << 20;
/// opcode(1) + request_id(8)
inline constexpr std::uint32_t kFrameHeaderLength = 9;

/// Wire layout: length(u32, counts opcode and everything after it)
/// opcode(u8) request_id(u64) body. All integers big-endian.
struct Frame {
  Opcode opcode = Opcode::Error;
  std::uint64_t request_id = 0;
  Bytes body;
  friend bool operator==(const Frame&, const Frame&) = default;
};

Bytes encode_frame(const Frame& frame);

/// Decodes exactly one frame occupying all of bytes. Errc::Malformed on a
/// bad length field or truncation. Opcodes are not checked here.
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Reads the length prefix; nullopt until 4 bytes are available.
std::optional<std::uint32_t> peek_length(std::span<const std::uint8_t> bytes);

}  // namespace vblob::rpc
