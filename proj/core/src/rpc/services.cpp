#include "vblob/rpc/services.hpp"

#include <thread>
#include <type_traits>

#include "vblob/wire.hpp"

namespace vblob::rpc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] Reply unsupported(const Request& request, const char* role) {
  raise(Errc::Unsupported,
        std::string(role) + " does not serve opcode " + std::to_string(static_cast<int>(opcode_of(request))));
}

}  // namespace

Reply PageStoreService::dispatch(const Request& request) {
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  return std::visit(overloaded{
                        [&](const PutPageReq& r) -> Reply {
                          store_->put_page(r.pid, r.data);
                          return Ack{};
                        },
                        [&](const GetPageReq& r) -> Reply { return PageData{store_->get_page(r.pid, r.off, r.len)}; },
                        [&](const UsageReq&) -> Reply {
                          auto u = store_->usage();
                          return UsageReply{u.page_count, u.byte_count};
                        },
                        [&](const auto&) -> Reply { unsupported(request, "data provider"); },
                    },
                    request);
}

std::optional<Frame> PageStoreService::dispatch_frame(const Frame& request) {
  if (request.opcode != Opcode::GetPage) return std::nullopt;
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  const auto r = std::get<GetPageReq>(parse_request(request));
  auto view = store_->view_page(r.pid, r.off, r.len);
  Frame reply{Opcode::GetPage, request.request_id, {}};
  reply.body.reserve(4 + view.bytes.size());
  WireWriter(reply.body).blob(view.bytes);
  return reply;
}

Reply MetaStoreService::dispatch(const Request& request) {
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  return std::visit(overloaded{
                        [&](const PutNodeReq& r) -> Reply {
                          store_->put_encoded(r.key, r.node);
                          return Ack{};
                        },
                        [&](const GetNodeReq& r) -> Reply {
                          auto node = store_->get_encoded(r.key);
                          if (!node) raise(Errc::NotFound, "no node " + to_string(r.key));
                          return NodeData{*std::move(node)};
                        },
                        [&](const auto&) -> Reply { unsupported(request, "metadata provider"); },
                    },
                    request);
}

Reply ProviderManagerService::dispatch(const Request& request) {
  return std::visit(overloaded{
                        [&](const RegisterReq& r) -> Reply {
                          manager_->register_provider(r.addr);
                          return Ack{};
                        },
                        [&](const AllocateReq& r) -> Reply { return AddrList{manager_->allocate(r.n)}; },
                        [&](const ReportReq& r) -> Reply {
                          manager_->report(r.addr, r.pages);
                          return Ack{};
                        },
                        [&](const auto&) -> Reply { unsupported(request, "provider manager"); },
                    },
                    request);
}

Reply VersionManagerService::dispatch(const Request& request) {
  return std::visit(
      overloaded{
          [&](const CreateBlobReq& r) -> Reply { return BlobIdReply{manager_->create_blob(r.psize)}; },
          [&](const AssignVersionReq& r) -> Reply {
            std::optional<std::uint64_t> offset;
            if (r.kind == UpdateKind::Write) offset = r.offset;
            return TicketReply{manager_->assign_version(r.blob, r.kind, offset, r.size)};
          },
          [&](const NotifySuccessReq& r) -> Reply {
            manager_->notify_success(r.blob, r.version);
            return Ack{};
          },
          [&](const GetRecentReq& r) -> Reply { return VersionReply{manager_->get_recent(r.blob)}; },
          [&](const GetSizeReq& r) -> Reply { return SizeReply{manager_->get_size(r.blob, r.version)}; },
          [&](const WaitPublishedReq& r) -> Reply {
            std::optional<std::chrono::milliseconds> timeout;
            if (r.timeout_ms > 0) timeout = std::chrono::milliseconds(r.timeout_ms);
            manager_->wait_published(r.blob, r.version, timeout);
            return Ack{};
          },
          [&](const BranchReq& r) -> Reply { return BlobIdReply{manager_->branch(r.blob, r.version)}; },
          [&](const BlobInfoReq& r) -> Reply { return BlobInfoReply{manager_->info(r.blob)}; },
          [&](const auto&) -> Reply { unsupported(request, "version manager"); },
      },
      request);
}

}  // namespace vblob::rpc
