#include "vblob/error.hpp"

namespace vblob {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NotFound: return "NOT_FOUND";
    case Errc::Conflict: return "CONFLICT";
    case Errc::Timeout: return "TIMEOUT";
    case Errc::StoreFull: return "STORE_FULL";
    case Errc::Range: return "RANGE";
    case Errc::NoProviders: return "NO_PROVIDERS";
    case Errc::UnknownProvider: return "UNKNOWN_PROVIDER";
    case Errc::UnknownBlob: return "UNKNOWN_BLOB";
    case Errc::UnknownVersion: return "UNKNOWN_VERSION";
    case Errc::OffsetBeyondEnd: return "OFFSET_BEYOND_END";
    case Errc::NotPublished: return "NOT_PUBLISHED";
    case Errc::OutOfBounds: return "OUT_OF_BOUNDS";
    case Errc::BadPageSize: return "BAD_PSIZE";
    case Errc::Malformed: return "MALFORMED";
    case Errc::Connection: return "CONNECTION";
    case Errc::Unsupported: return "UNSUPPORTED";
    case Errc::InvalidArgument: return "INVALID_ARGUMENT";
    case Errc::CheckFailed: return "CHECK_FAILED";
    case Errc::Internal: return "INTERNAL";
  }
  return "UNKNOWN_ERROR";
}

void raise(Errc code, const std::string& what) {
  throw Error(code, std::string(errc_name(code)) + ": " + what);
}

}  // namespace vblob
