#include "vblob/rpc/stubs.hpp"

#include <cstring>
#include <limits>

#include "vblob/wire.hpp"

namespace vblob::rpc {

void RemotePageStore::put_page(const PageId& pid, Bytes bytes) { call(*ch_, PutPageReq{pid, std::move(bytes)}); }

Bytes RemotePageStore::get_page(const PageId& pid, std::uint64_t off, std::uint64_t len) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (off > kMax || len > kMax) raise(Errc::Range, "extent does not fit the wire format");
  return call(*ch_, GetPageReq{pid, static_cast<std::uint32_t>(off), static_cast<std::uint32_t>(len)}).data;
}

void RemotePageStore::read_into(const PageId& pid, std::uint64_t off, std::span<std::uint8_t> dst) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (off > kMax || dst.size() > kMax) raise(Errc::Range, "extent does not fit the wire format");
  GetPageReq req{pid, static_cast<std::uint32_t>(off), static_cast<std::uint32_t>(dst.size())};
  Frame reply = ch_->roundtrip(request_frame(Request{req}, 0), kDefaultCallTimeout);
  if (reply.opcode != Opcode::GetPage) {
    auto parsed = parse_reply(Opcode::GetPage, reply);
    if (auto* err = std::get_if<ErrorReply>(&parsed)) throw Error(err->code, err->message);
    raise(Errc::Malformed, "unexpected reply type");
  }
  WireReader r(reply.body);
  if (r.u32() != dst.size()) raise(Errc::Malformed, "page reply length does not match the request");
  auto bytes = r.raw(dst.size());
  r.expect_end();
  std::memcpy(dst.data(), bytes.data(), bytes.size());
}

PageUsage RemotePageStore::usage() {
  auto r = call(*ch_, UsageReq{});
  return {r.page_count, r.byte_count};
}

void RemoteMetaStore::put_node(const NodeKey& key, const TreeNode& node) {
  call(*ch_, PutNodeReq{key, node.encode()});
}

std::optional<TreeNode> RemoteMetaStore::find_node(const NodeKey& key) {
  try {
    return TreeNode::decode(call(*ch_, GetNodeReq{key}).node);
  } catch (const Error& e) {
    if (e.code() == Errc::NotFound) return std::nullopt;
    throw;
  }
}

void RemoteProviderManager::register_provider(const std::string& addr) { call(*ch_, RegisterReq{addr}); }

std::vector<std::string> RemoteProviderManager::allocate(std::size_t n) {
  auto addrs = call(*ch_, AllocateReq{static_cast<std::uint32_t>(n)}).addrs;
  if (addrs.size() != n) raise(Errc::Malformed, "allocator returned the wrong number of providers");
  return addrs;
}

void RemoteProviderManager::report(const std::string& addr, std::uint64_t pages) {
  call(*ch_, ReportReq{addr, pages});
}

BlobId RemoteVersionManager::create_blob(std::uint64_t psize) { return call(*ch_, CreateBlobReq{psize}).blob; }

WriteTicket RemoteVersionManager::assign_version(const BlobId& blob, UpdateKind kind,
                                                 std::optional<std::uint64_t> offset, std::uint64_t size) {
  return call(*ch_, AssignVersionReq{blob, kind, offset.value_or(0), size}).ticket;
}

void RemoteVersionManager::notify_success(const BlobId& blob, Version v) { call(*ch_, NotifySuccessReq{blob, v}); }

Version RemoteVersionManager::get_recent(const BlobId& blob) { return call(*ch_, GetRecentReq{blob}).version; }

std::uint64_t RemoteVersionManager::get_size(const BlobId& blob, Version v) {
  return call(*ch_, GetSizeReq{blob, v}).size;
}

void RemoteVersionManager::wait_published(const BlobId& blob, Version v,
                                          std::optional<std::chrono::milliseconds> timeout) {
  std::uint64_t ms = timeout ? static_cast<std::uint64_t>(std::max<std::int64_t>(timeout->count(), 1)) : 0;
  // The transport deadline must outlast the server-side wait.
  auto transport_timeout = timeout ? *timeout + std::chrono::seconds(5) : std::chrono::milliseconds(std::chrono::hours(24 * 365));
  call(*ch_, WaitPublishedReq{blob, v, ms}, transport_timeout);
}

BlobId RemoteVersionManager::branch(const BlobId& blob, Version v) { return call(*ch_, BranchReq{blob, v}).blob; }

BlobInfo RemoteVersionManager::info(const BlobId& blob) { return call(*ch_, BlobInfoReq{blob}).info; }

}  // namespace vblob::rpc
