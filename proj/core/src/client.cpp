#include "vblob/client.hpp"

#include <algorithm>
#include <cstring>

#include "vblob/error.hpp"
#include "vblob/parallel.hpp"

namespace vblob {

namespace {

std::shared_ptr<DhtNodeStore> make_dht(rpc::Connector& connector, const std::vector<std::string>& endpoints) {
  std::vector<std::shared_ptr<NodeStore>> shards;
  shards.reserve(endpoints.size());
  for (const auto& ep : endpoints) shards.push_back(std::make_shared<rpc::RemoteMetaStore>(connector.channel(ep)));
  return std::make_shared<DhtNodeStore>(std::move(shards));
}

struct Chunk {
  std::uint64_t buf_off;
  std::uint64_t len;
};

/// WRITE knows its offset up front, so its page objects line up with blob
/// pages. APPEND learns the offset only from its ticket; its objects are cut
/// at psize multiples of the buffer and may straddle blob pages.
std::vector<Chunk> cut_chunks(std::uint64_t size, std::uint64_t psize, std::uint64_t align_offset) {
  std::vector<Chunk> out;
  std::uint64_t pos = 0;
  std::uint64_t first = std::min(size, psize - align_offset % psize);
  out.push_back({0, first});
  pos = first;
  while (pos < size) {
    auto len = std::min(psize, size - pos);
    out.push_back({pos, len});
    pos += len;
  }
  return out;
}

}  // namespace

Client::Client(ClusterConfig cluster, ClientOptions options, std::shared_ptr<rpc::Connector> connector)
    : cluster_(std::move(cluster)),
      options_(options),
      connector_(connector ? std::move(connector) : std::make_shared<rpc::Connector>(options.link)),
      vm_(connector_->channel(cluster_.versioner)),
      pm_(connector_->channel(cluster_.allocator)),
      dht_(make_dht(*connector_, cluster_.metastores)) {}

TreeContext Client::context(const BlobHandle& h) const {
  return TreeContext{*dht_, h.lineage, h.psize, options_.wait, options_.skip_concurrent_overlay};
}

rpc::RemotePageStore Client::provider(const std::string& addr) { return rpc::RemotePageStore(connector_->channel(addr)); }

BlobHandle Client::create(std::uint64_t psize) {
  if (!is_power_of_two(psize) || psize > kMaxPageSize) {
    raise(Errc::BadPageSize, "page size " + std::to_string(psize) + " is not a power of two <= 8 MiB");
  }
  auto id = vm_.create_blob(psize);
  return BlobHandle{id, psize, Lineage(id)};
}

BlobHandle Client::open(const BlobId& id) {
  auto info = vm_.info(id);
  std::vector<Lineage::Link> links{{id, info.fork}};
  auto parent = info.parent;
  while (!parent.is_nil()) {
    auto pinfo = vm_.info(parent);
    links.push_back({parent, pinfo.fork});
    parent = pinfo.parent;
  }
  return BlobHandle{id, info.psize, Lineage(std::move(links))};
}

void Client::read(const BlobHandle& h, Version v, std::span<std::uint8_t> buffer, std::uint64_t offset) {
  const auto size_v = vm_.get_size(h.id, v);
  if (offset > size_v || buffer.size() > size_v - offset) {
    raise(Errc::OutOfBounds, "range " + to_string(ByteRange{offset, buffer.size()}) + " beyond snapshot size " +
                                 std::to_string(size_v));
  }
  if (buffer.empty()) return;
  auto extents = read_meta(context(h), v, ByteRange{offset, buffer.size()}, size_v);
  parallel_for(extents.size(), [&](std::size_t i) {
    const auto& e = extents[i];
    provider(e.provider).read_into(e.pid, e.src_off, buffer.subspan(e.blob_offset - offset, e.len));
  });
}

Bytes Client::read(const BlobHandle& h, Version v, std::uint64_t offset, std::uint64_t size) {
  Bytes out(size);
  read(h, v, out, offset);
  return out;
}

Version Client::write(const BlobHandle& h, std::span<const std::uint8_t> data, std::uint64_t offset) {
  return update(h, UpdateKind::Write, offset, data);
}

Version Client::append(const BlobHandle& h, std::span<const std::uint8_t> data) {
  return update(h, UpdateKind::Append, std::nullopt, data);
}

Version Client::update(const BlobHandle& h, UpdateKind kind, std::optional<std::uint64_t> offset,
                       std::span<const std::uint8_t> data) {
  if (data.empty()) raise(Errc::InvalidArgument, "update size must be at least 1");
  const auto psize = h.psize;
  auto chunks = cut_chunks(data.size(), psize, offset.value_or(0));

  // Data first, in parallel, with no coordination between writers.
  auto providers = pm_.allocate(chunks.size());
  std::vector<PageId> pids(chunks.size());
  for (auto& pid : pids) pid = PageId::random();
  parallel_for(chunks.size(), [&](std::size_t i) {
    auto piece = data.subspan(chunks[i].buf_off, chunks[i].len);
    provider(providers[i]).put_page(pids[i], Bytes(piece.begin(), piece.end()));
  });

  auto ticket = vm_.assign_version(h.id, kind, offset, data.size());
  const ByteRange range{ticket.effective_offset, data.size()};
  const auto first_page = range.offset / psize;

  std::vector<PageDescriptor> pd;
  pd.reserve(chunks.size() + 1);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    std::uint64_t lo = range.offset + chunks[i].buf_off;
    const std::uint64_t hi = lo + chunks[i].len;
    while (lo < hi) {
      const std::uint64_t page = lo / psize;
      const std::uint64_t piece_end = std::min(hi, (page + 1) * psize);
      pd.push_back(PageDescriptor{pids[i], page - first_page, providers[i],
                                  static_cast<std::uint32_t>(lo - page * psize),
                                  static_cast<std::uint32_t>(piece_end - lo),
                                  static_cast<std::uint32_t>(lo - range.offset - chunks[i].buf_off)});
      lo = piece_end;
    }
  }

  build_meta(context(h), ticket, range, pd);
  vm_.notify_success(h.id, ticket.vw);
  return ticket.vw;
}

void Client::sync(const BlobHandle& h, Version v, std::optional<std::chrono::milliseconds> timeout) {
  vm_.wait_published(h.id, v, timeout);
}

Version Client::get_recent(const BlobHandle& h) { return vm_.get_recent(h.id); }

std::uint64_t Client::get_size(const BlobHandle& h, Version v) { return vm_.get_size(h.id, v); }

BlobHandle Client::branch(const BlobHandle& h, Version v) {
  auto id = vm_.branch(h.id, v);
  std::vector<Lineage::Link> links{{id, v}};
  links.insert(links.end(), h.lineage.links().begin(), h.lineage.links().end());
  return BlobHandle{id, h.psize, Lineage(std::move(links))};
}

std::vector<PageExtent> Client::locate(const BlobHandle& h, Version v, std::uint64_t offset, std::uint64_t size,
                                       ReadStats* stats) {
  const auto size_v = vm_.get_size(h.id, v);
  if (offset > size_v || size > size_v - offset) raise(Errc::OutOfBounds, "range beyond snapshot size");
  return read_meta(context(h), v, ByteRange{offset, size}, size_v, stats);
}

}  // namespace vblob
