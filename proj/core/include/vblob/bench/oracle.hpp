#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "vblob/types.hpp"
#include "vblob/versioner.hpp"

namespace vblob::bench {

struct OracleUpdate {
  UpdateKind kind = UpdateKind::Write;
  /// Ignored for appends.
  std::uint64_t offset = 0;
  Bytes data;
};

/// Flat-buffer reference model of one blob's version history. Snapshots are
/// split into fixed chunks shared between versions, so an update copies only
/// the chunks it touches.
class OracleBlob {
 public:
  static constexpr std::uint64_t kChunk = 4096;

  OracleBlob();

  /// Applies the update as version latest() + 1. Errc::OffsetBeyondEnd,
  /// Errc::InvalidArgument on an empty update.
  Version apply(const OracleUpdate& update);

  Version latest() const noexcept { return versions_.size() - 1; }
  /// Errc::UnknownVersion past latest().
  std::uint64_t size(Version v) const;
  /// Byte range written by update v (empty for v = 0).
  ByteRange range(Version v) const;
  /// Errc::OutOfBounds past size(v).
  Bytes read(Version v, std::uint64_t offset, std::uint64_t len) const;
  Bytes snapshot(Version v) const { return read(v, 0, size(v)); }

  /// A branch sharing versions 0..v.
  OracleBlob fork(Version v) const;

 private:
  struct Snapshot {
    std::uint64_t size = 0;
    ByteRange range;
    std::vector<std::shared_ptr<const Bytes>> chunks;
  };

  const Snapshot& at(Version v) const;

  std::vector<Snapshot> versions_;
};

/// Reference state after applying history[0..k) for every k.
OracleBlob oracle_apply(std::span<const OracleUpdate> history);

}  // namespace vblob::bench
