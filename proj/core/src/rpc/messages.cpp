#include "vblob/rpc/messages.hpp"

#include <limits>
#include <type_traits>

#include "vblob/wire.hpp"

namespace vblob::rpc {

namespace {

// One field list per message drives both directions.

struct Encoder {
  WireWriter w;

  void operator()(std::uint8_t& v) { w.u8(v); }
  void operator()(std::uint32_t& v) { w.u32(v); }
  void operator()(std::uint64_t& v) { w.u64(v); }
  template <typename Tag>
  void operator()(Id128<Tag>& v) { w.id(v); }
  void operator()(Bytes& v) { w.blob(v); }
  void operator()(std::string& v) { w.str32(v); }
  void operator()(Errc& v) { w.u16(static_cast<std::uint16_t>(v)); }
  void operator()(UpdateKind& v) { w.u8(static_cast<std::uint8_t>(v)); }
  void operator()(NodeKey& v) { w.raw(v.encode()); }
  void operator()(std::vector<std::string>& v) {
    w.u32(static_cast<std::uint32_t>(v.size()));
    for (auto& s : v) (*this)(s);
  }
  void operator()(std::vector<ConcurrentUpdate>& v) {
    w.u32(static_cast<std::uint32_t>(v.size()));
    for (auto& c : v) {
      w.u64(c.version);
      w.u64(c.range.offset);
      w.u64(c.range.size);
      w.u64(c.root_pages);
    }
  }
};

struct Decoder {
  WireReader r;

  void operator()(std::uint8_t& v) { v = r.u8(); }
  void operator()(std::uint32_t& v) { v = r.u32(); }
  void operator()(std::uint64_t& v) { v = r.u64(); }
  template <typename Tag>
  void operator()(Id128<Tag>& v) { v = r.id<Tag>(); }
  void operator()(Bytes& v) { v = r.blob(); }
  void operator()(std::string& v) { v = r.str32(); }
  void operator()(Errc& v) { v = static_cast<Errc>(r.u16()); }
  void operator()(UpdateKind& v) {
    auto k = r.u8();
    if (k > 1) raise(Errc::Malformed, "bad update kind");
    v = static_cast<UpdateKind>(k);
  }
  void operator()(NodeKey& v) { v = NodeKey::decode(r.raw(NodeKey::kEncodedSize)); }
  void operator()(std::vector<std::string>& v) {
    auto n = r.u32();
    // Each entry needs at least its 4-byte prefix.
    if (n > r.remaining() / 4) raise(Errc::Malformed, "address count exceeds frame");
    v.resize(n);
    for (auto& s : v) (*this)(s);
  }
  void operator()(std::vector<ConcurrentUpdate>& v) {
    auto n = r.u32();
    if (n > r.remaining() / 32) raise(Errc::Malformed, "concurrent update count exceeds frame");
    v.resize(n);
    for (auto& c : v) {
      c.version = r.u64();
      c.range.offset = r.u64();
      c.range.size = r.u64();
      c.root_pages = r.u64();
    }
  }
};

template <typename IO> void fields(IO&, Ack&) {}
template <typename IO> void fields(IO& io, PageData& m) { io(m.data); }
template <typename IO> void fields(IO& io, UsageReply& m) { io(m.page_count); io(m.byte_count); }
template <typename IO> void fields(IO& io, NodeData& m) { io(m.node); }
template <typename IO> void fields(IO& io, AddrList& m) { io(m.addrs); }
template <typename IO> void fields(IO& io, BlobIdReply& m) { io(m.blob); }
template <typename IO> void fields(IO& io, TicketReply& m) {
  io(m.ticket.vw);
  io(m.ticket.effective_offset);
  io(m.ticket.prev_size);
  io(m.ticket.vp);
  io(m.ticket.vp_size);
  io(m.ticket.concurrent);
}
template <typename IO> void fields(IO& io, VersionReply& m) { io(m.version); }
template <typename IO> void fields(IO& io, SizeReply& m) { io(m.size); }
template <typename IO> void fields(IO& io, BlobInfoReply& m) {
  io(m.info.psize);
  io(m.info.parent);
  io(m.info.fork);
}
template <typename IO> void fields(IO& io, ErrorReply& m) { io(m.code); io(m.message); }

template <typename IO> void fields(IO& io, PutPageReq& m) { io(m.pid); io(m.data); }
template <typename IO> void fields(IO& io, GetPageReq& m) { io(m.pid); io(m.off); io(m.len); }
template <typename IO> void fields(IO&, UsageReq&) {}
template <typename IO> void fields(IO& io, PutNodeReq& m) { io(m.key); io(m.node); }
template <typename IO> void fields(IO& io, GetNodeReq& m) { io(m.key); }
template <typename IO> void fields(IO& io, RegisterReq& m) { io(m.addr); }
template <typename IO> void fields(IO& io, AllocateReq& m) { io(m.n); }
template <typename IO> void fields(IO& io, ReportReq& m) { io(m.addr); io(m.pages); }
template <typename IO> void fields(IO& io, CreateBlobReq& m) { io(m.psize); }
template <typename IO> void fields(IO& io, AssignVersionReq& m) { io(m.blob); io(m.kind); io(m.offset); io(m.size); }
template <typename IO> void fields(IO& io, NotifySuccessReq& m) { io(m.blob); io(m.version); }
template <typename IO> void fields(IO& io, GetRecentReq& m) { io(m.blob); }
template <typename IO> void fields(IO& io, GetSizeReq& m) { io(m.blob); io(m.version); }
template <typename IO> void fields(IO& io, WaitPublishedReq& m) { io(m.blob); io(m.version); io(m.timeout_ms); }
template <typename IO> void fields(IO& io, BranchReq& m) { io(m.blob); io(m.version); }
template <typename IO> void fields(IO& io, BlobInfoReq& m) { io(m.blob); }

template <typename M>
Bytes encode_body(const M& m) {
  Bytes out;
  Encoder enc{WireWriter(out)};
  fields(enc, const_cast<M&>(m));
  return out;
}

template <typename M>
M decode_body(const Bytes& body) {
  M m;
  Decoder dec{WireReader(body)};
  fields(dec, m);
  dec.r.expect_end();
  return m;
}

Request empty_request(Opcode op) {
  switch (op) {
    case Opcode::PutPage: return PutPageReq{};
    case Opcode::GetPage: return GetPageReq{};
    case Opcode::Usage: return UsageReq{};
    case Opcode::PutNode: return PutNodeReq{};
    case Opcode::GetNode: return GetNodeReq{};
    case Opcode::Register: return RegisterReq{};
    case Opcode::Allocate: return AllocateReq{};
    case Opcode::Report: return ReportReq{};
    case Opcode::CreateBlob: return CreateBlobReq{};
    case Opcode::AssignVersion: return AssignVersionReq{};
    case Opcode::NotifySuccess: return NotifySuccessReq{};
    case Opcode::GetRecent: return GetRecentReq{};
    case Opcode::GetSize: return GetSizeReq{};
    case Opcode::WaitPublished: return WaitPublishedReq{};
    case Opcode::Branch: return BranchReq{};
    case Opcode::BlobInfo: return BlobInfoReq{};
    case Opcode::Error: break;
  }
  raise(Errc::Unsupported, "unknown opcode " + std::to_string(static_cast<int>(op)));
}

}  // namespace

Opcode opcode_of(const Request& request) {
  return std::visit([](const auto& m) { return std::decay_t<decltype(m)>::kOp; }, request);
}

Frame request_frame(const Request& request, std::uint64_t request_id) {
  return std::visit(
      [&](const auto& m) {
        return Frame{std::decay_t<decltype(m)>::kOp, request_id, encode_body(m)};
      },
      request);
}

Request parse_request(const Frame& frame) {
  return std::visit(
      [&](auto&& proto) -> Request { return decode_body<std::decay_t<decltype(proto)>>(frame.body); },
      empty_request(frame.opcode));
}

Frame reply_frame(Opcode request_op, std::uint64_t request_id, const Reply& reply) {
  return std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        Opcode op = std::is_same_v<M, ErrorReply> ? Opcode::Error : request_op;
        return Frame{op, request_id, encode_body(m)};
      },
      reply);
}

Reply parse_reply(Opcode request_op, const Frame& frame) {
  if (frame.opcode == Opcode::Error) return decode_body<ErrorReply>(frame.body);
  if (frame.opcode != request_op) raise(Errc::Malformed, "reply opcode does not match request");
  return std::visit(
      [&](auto&& proto) -> Reply {
        using Req = std::decay_t<decltype(proto)>;
        return decode_body<typename Req::Reply>(frame.body);
      },
      empty_request(request_op));
}

}  // namespace vblob::rpc
