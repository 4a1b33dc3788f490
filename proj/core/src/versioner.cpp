#include "vblob/versioner.hpp"

#include <algorithm>

#include "vblob/error.hpp"

namespace vblob {

const VersionManager::BlobState& VersionManager::state(const BlobId& blob) const {
  auto it = blobs_.find(blob);
  if (it == blobs_.end()) raise(Errc::UnknownBlob, blob.hex());
  return it->second;
}

VersionManager::BlobState& VersionManager::state(const BlobId& blob) {
  auto it = blobs_.find(blob);
  if (it == blobs_.end()) raise(Errc::UnknownBlob, blob.hex());
  return it->second;
}

std::uint64_t VersionManager::size_locked(const BlobId& blob, Version v) const {
  const BlobState* s = &state(blob);
  while (v <= s->info.fork) {
    if (v == 0 || s->info.parent.is_nil()) return 0;
    s = &state(s->info.parent);
  }
  return s->records[v - s->info.fork - 1].snapshot_size;
}

BlobId VersionManager::create_blob(std::uint64_t psize) {
  if (!is_power_of_two(psize) || psize > kMaxPageSize) {
    raise(Errc::BadPageSize, "page size " + std::to_string(psize) + " is not a power of two <= 8 MiB");
  }
  std::lock_guard lock(mu_);
  BlobId id;
  do {
    id = BlobId::random();
  } while (blobs_.contains(id));
  blobs_[id].info.psize = psize;
  return id;
}

WriteTicket VersionManager::assign_version(const BlobId& blob, UpdateKind kind,
                                           std::optional<std::uint64_t> offset, std::uint64_t size) {
  if (size == 0) raise(Errc::InvalidArgument, "update size must be at least 1");
  if (kind == UpdateKind::Write && !offset) raise(Errc::InvalidArgument, "WRITE needs an offset");
  std::lock_guard lock(mu_);
  auto& s = state(blob);
  WriteTicket t;
  t.vw = s.last_assigned() + 1;
  t.prev_size = size_locked(blob, t.vw - 1);
  t.effective_offset = kind == UpdateKind::Append ? t.prev_size : *offset;
  if (t.effective_offset > t.prev_size) {
    raise(Errc::OffsetBeyondEnd, "offset " + std::to_string(t.effective_offset) + " beyond snapshot size " +
                                     std::to_string(t.prev_size));
  }
  t.vp = s.published;
  t.vp_size = size_locked(blob, t.vp);
  for (Version w = std::max(t.vp, s.info.fork) + 1; w < t.vw; ++w) {
    const auto& rec = s.records[w - s.info.fork - 1];
    t.concurrent.push_back(
        ConcurrentUpdate{w, rec.range, root_cover(page_count(rec.snapshot_size, s.info.psize))});
  }
  ByteRange range{t.effective_offset, size};
  s.records.push_back(VersionRecord{t.vw, range, std::max(t.prev_size, range.end()), false});
  s.notified.push_back(false);
  return t;
}

void VersionManager::notify_success(const BlobId& blob, Version v) {
  std::lock_guard lock(mu_);
  auto& s = state(blob);
  if (v <= s.info.fork || v > s.last_assigned()) {
    raise(Errc::UnknownVersion, "version " + std::to_string(v) + " was not assigned");
  }
  auto idx = v - s.info.fork - 1;
  if (s.notified[idx]) raise(Errc::UnknownVersion, "version " + std::to_string(v) + " already notified");
  s.notified[idx] = true;
  bool advanced = false;
  while (s.published < s.last_assigned() && s.notified[s.published - s.info.fork]) {
    s.records[s.published - s.info.fork].published = true;
    ++s.published;
    advanced = true;
  }
  if (advanced) published_cv_.notify_all();
}

Version VersionManager::get_recent(const BlobId& blob) const {
  std::lock_guard lock(mu_);
  return state(blob).published;
}

std::uint64_t VersionManager::get_size(const BlobId& blob, Version v) const {
  std::lock_guard lock(mu_);
  if (v > state(blob).published) {
    raise(Errc::NotPublished, "version " + std::to_string(v) + " is not published");
  }
  return size_locked(blob, v);
}

void VersionManager::wait_published(const BlobId& blob, Version v,
                                    std::optional<std::chrono::milliseconds> timeout) {
  std::unique_lock lock(mu_);
  if (v > state(blob).last_assigned()) {
    raise(Errc::UnknownVersion, "version " + std::to_string(v) + " was never assigned");
  }
  // Blob states are never erased, so the reference stays valid across waits.
  const auto& s = state(blob);
  auto ready = [&] { return s.published >= v; };
  if (!timeout) {
    published_cv_.wait(lock, ready);
  } else if (!published_cv_.wait_for(lock, *timeout, ready)) {
    raise(Errc::Timeout, "version " + std::to_string(v) + " not published in time");
  }
}

BlobId VersionManager::branch(const BlobId& blob, Version v) {
  std::lock_guard lock(mu_);
  const auto& parent = state(blob);
  if (v > parent.published) raise(Errc::NotPublished, "cannot branch at unpublished version " + std::to_string(v));
  BlobId id;
  do {
    id = BlobId::random();
  } while (blobs_.contains(id));
  BlobState child;
  child.info = BlobInfo{parent.info.psize, blob, v};
  child.published = v;
  blobs_.emplace(id, std::move(child));
  return id;
}

BlobId VersionManager::resolve_owner(const BlobId& blob, Version v) const {
  std::lock_guard lock(mu_);
  BlobId cur = blob;
  for (;;) {
    const auto& s = state(cur);
    if (v > s.info.fork || s.info.parent.is_nil()) return cur;
    cur = s.info.parent;
  }
}

BlobInfo VersionManager::info(const BlobId& blob) const {
  std::lock_guard lock(mu_);
  return state(blob).info;
}

Version VersionManager::last_assigned(const BlobId& blob) const {
  std::lock_guard lock(mu_);
  return state(blob).last_assigned();
}

std::vector<VersionRecord> VersionManager::records(const BlobId& blob) const {
  std::lock_guard lock(mu_);
  return state(blob).records;
}

}  // namespace vblob
