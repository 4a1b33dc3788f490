#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vblob {

/// Error codes shared by every service. Numeric values travel on the wire
/// inside ERROR frames and must stay stable.
enum class Errc : std::uint16_t {
  NotFound = 1,
  Conflict = 2,
  Timeout = 3,
  StoreFull = 4,
  Range = 5,
  NoProviders = 6,
  UnknownProvider = 7,
  UnknownBlob = 8,
  UnknownVersion = 9,
  OffsetBeyondEnd = 10,
  NotPublished = 11,
  OutOfBounds = 12,
  BadPageSize = 13,
  Malformed = 14,
  Connection = 15,
  Unsupported = 16,
  InvalidArgument = 17,
  CheckFailed = 18,
  Internal = 19,
};

std::string_view errc_name(Errc code) noexcept;

/// The single exception type thrown by the library. Remote failures are
/// rethrown on the caller side with the code carried by the ERROR frame.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& what);

}  // namespace vblob
