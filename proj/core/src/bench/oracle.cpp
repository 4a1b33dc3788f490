#include "vblob/bench/oracle.hpp"

#include <algorithm>
#include <cstring>

#include "vblob/error.hpp"

namespace vblob::bench {

OracleBlob::OracleBlob() : versions_(1) {}

const OracleBlob::Snapshot& OracleBlob::at(Version v) const {
  if (v >= versions_.size()) raise(Errc::UnknownVersion, "oracle has no version " + std::to_string(v));
  return versions_[v];
}

Version OracleBlob::apply(const OracleUpdate& update) {
  if (update.data.empty()) raise(Errc::InvalidArgument, "empty update");
  Snapshot next = versions_.back();
  const std::uint64_t offset = update.kind == UpdateKind::Append ? next.size : update.offset;
  if (offset > next.size) {
    raise(Errc::OffsetBeyondEnd, "offset " + std::to_string(offset) + " beyond size " + std::to_string(next.size));
  }
  const std::uint64_t end = offset + update.data.size();
  next.size = std::max(next.size, end);
  next.range = ByteRange{offset, update.data.size()};
  next.chunks.resize((next.size + kChunk - 1) / kChunk);

  for (std::uint64_t c = offset / kChunk; c * kChunk < end; ++c) {
    auto fresh = next.chunks[c] ? std::make_shared<Bytes>(*next.chunks[c]) : std::make_shared<Bytes>();
    const std::uint64_t chunk_lo = c * kChunk;
    const std::uint64_t chunk_len = std::min(kChunk, next.size - chunk_lo);
    fresh->resize(chunk_len, 0);
    const std::uint64_t lo = std::max(offset, chunk_lo);
    const std::uint64_t hi = std::min(end, chunk_lo + kChunk);
    std::memcpy(fresh->data() + (lo - chunk_lo), update.data.data() + (lo - offset), hi - lo);
    next.chunks[c] = std::move(fresh);
  }
  versions_.push_back(std::move(next));
  return latest();
}

std::uint64_t OracleBlob::size(Version v) const { return at(v).size; }

ByteRange OracleBlob::range(Version v) const { return at(v).range; }

Bytes OracleBlob::read(Version v, std::uint64_t offset, std::uint64_t len) const {
  const auto& s = at(v);
  if (offset > s.size || len > s.size - offset) {
    raise(Errc::OutOfBounds, "oracle read beyond size " + std::to_string(s.size));
  }
  Bytes out(len);
  std::uint64_t pos = offset;
  while (pos < offset + len) {
    const std::uint64_t c = pos / kChunk;
    const std::uint64_t in_chunk = pos - c * kChunk;
    const std::uint64_t n = std::min(kChunk - in_chunk, offset + len - pos);
    std::memcpy(out.data() + (pos - offset), s.chunks[c]->data() + in_chunk, n);
    pos += n;
  }
  return out;
}

OracleBlob OracleBlob::fork(Version v) const {
  at(v);
  OracleBlob child;
  child.versions_.assign(versions_.begin(), versions_.begin() + static_cast<std::ptrdiff_t>(v) + 1);
  return child;
}

OracleBlob oracle_apply(std::span<const OracleUpdate> history) {
  OracleBlob blob;
  for (const auto& u : history) blob.apply(u);
  return blob;
}

}  // namespace vblob::bench
