#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "vblob/types.hpp"

namespace vblob {

enum class UpdateKind : std::uint8_t { Write = 0, Append = 1 };

/// An assigned but unpublished update older than the ticket holder.
struct ConcurrentUpdate {
  Version version = 0;
  ByteRange range;
  /// Root cover (in pages) of that update's snapshot.
  std::uint64_t root_pages = 0;
  friend bool operator==(const ConcurrentUpdate&, const ConcurrentUpdate&) = default;
};

/// The version manager's grant to a writer.
struct WriteTicket {
  Version vw = 0;
  std::uint64_t effective_offset = 0;
  /// Size of snapshot vw - 1.
  std::uint64_t prev_size = 0;
  /// Latest published version at assignment time, and its size.
  Version vp = 0;
  std::uint64_t vp_size = 0;
  /// Every assigned-unpublished w with vp < w < vw, ascending.
  std::vector<ConcurrentUpdate> concurrent;
  friend bool operator==(const WriteTicket&, const WriteTicket&) = default;
};

struct VersionRecord {
  Version v = 0;
  ByteRange range;
  std::uint64_t snapshot_size = 0;
  bool published = false;
};

struct BlobInfo {
  std::uint64_t psize = 0;
  /// Nil for blobs created from scratch.
  BlobId parent;
  Version fork = 0;
  friend bool operator==(const BlobInfo&, const BlobInfo&) = default;
};

/// The version manager. All state sits behind one mutex; wait_published parks
/// only its caller.
class VersionManager {
 public:
  /// Errc::BadPageSize unless psize is a power of two <= kMaxPageSize.
  BlobId create_blob(std::uint64_t psize);

  /// Errc::UnknownBlob, Errc::OffsetBeyondEnd, Errc::InvalidArgument (size 0,
  /// or WRITE without an offset).
  WriteTicket assign_version(const BlobId& blob, UpdateKind kind, std::optional<std::uint64_t> offset,
                             std::uint64_t size);

  /// Errc::UnknownVersion for unassigned or already notified versions.
  void notify_success(const BlobId& blob, Version v);

  Version get_recent(const BlobId& blob) const;

  /// Errc::NotPublished, Errc::UnknownBlob.
  std::uint64_t get_size(const BlobId& blob, Version v) const;

  /// Errc::UnknownVersion when v was never assigned; Errc::Timeout.
  void wait_published(const BlobId& blob, Version v,
                      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  /// Errc::NotPublished, Errc::UnknownBlob.
  BlobId branch(const BlobId& blob, Version v);

  /// The blob whose metadata tree physically holds version v of blob.
  BlobId resolve_owner(const BlobId& blob, Version v) const;

  BlobInfo info(const BlobId& blob) const;
  Version last_assigned(const BlobId& blob) const;
  /// Records for versions fork+1 .. last_assigned.
  std::vector<VersionRecord> records(const BlobId& blob) const;

 private:
  struct BlobState {
    BlobInfo info;
    std::vector<VersionRecord> records;  // records[i] is version fork + 1 + i
    std::vector<bool> notified;
    Version published = 0;

    Version last_assigned() const { return info.fork + records.size(); }
  };

  const BlobState& state(const BlobId& blob) const;
  BlobState& state(const BlobId& blob);
  std::uint64_t size_locked(const BlobId& blob, Version v) const;

  mutable std::mutex mu_;
  std::condition_variable published_cv_;
  std::unordered_map<BlobId, BlobState> blobs_;
};

}  // namespace vblob
