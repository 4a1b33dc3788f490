#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "vblob/error.hpp"
#include "vblob/rpc/frame.hpp"
#include "vblob/tree_node.hpp"
#include "vblob/versioner.hpp"

namespace vblob::rpc {

// Replies. A successful reply echoes the request opcode; failures travel as
// an ERROR frame carrying ErrorReply.

struct Ack {
  friend bool operator==(const Ack&, const Ack&) = default;
};
struct PageData {
  Bytes data;
  friend bool operator==(const PageData&, const PageData&) = default;
};
struct UsageReply {
  std::uint64_t page_count = 0;
  std::uint64_t byte_count = 0;
  friend bool operator==(const UsageReply&, const UsageReply&) = default;
};
struct NodeData {
  /// Canonical node encoding.
  Bytes node;
  friend bool operator==(const NodeData&, const NodeData&) = default;
};
struct AddrList {
  std::vector<std::string> addrs;
  friend bool operator==(const AddrList&, const AddrList&) = default;
};
struct BlobIdReply {
  BlobId blob;
  friend bool operator==(const BlobIdReply&, const BlobIdReply&) = default;
};
struct TicketReply {
  WriteTicket ticket;
  friend bool operator==(const TicketReply&, const TicketReply&) = default;
};
struct VersionReply {
  Version version = 0;
  friend bool operator==(const VersionReply&, const VersionReply&) = default;
};
struct SizeReply {
  std::uint64_t size = 0;
  friend bool operator==(const SizeReply&, const SizeReply&) = default;
};
struct BlobInfoReply {
  BlobInfo info;
  friend bool operator==(const BlobInfoReply&, const BlobInfoReply&) = default;
};
struct ErrorReply {
  Errc code = Errc::Internal;
  std::string message;
  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};

// Requests, one per opcode.

struct PutPageReq {
  static constexpr Opcode kOp = Opcode::PutPage;
  using Reply = Ack;
  PageId pid;
  Bytes data;
  friend bool operator==(const PutPageReq&, const PutPageReq&) = default;
};
struct GetPageReq {
  static constexpr Opcode kOp = Opcode::GetPage;
  using Reply = PageData;
  PageId pid;
  std::uint32_t off = 0;
  std::uint32_t len = 0;
  friend bool operator==(const GetPageReq&, const GetPageReq&) = default;
};
struct UsageReq {
  static constexpr Opcode kOp = Opcode::Usage;
  using Reply = UsageReply;
  friend bool operator==(const UsageReq&, const UsageReq&) = default;
};
struct PutNodeReq {
  static constexpr Opcode kOp = Opcode::PutNode;
  using Reply = Ack;
  NodeKey key;
  Bytes node;
  friend bool operator==(const PutNodeReq&, const PutNodeReq&) = default;
};
struct GetNodeReq {
  static constexpr Opcode kOp = Opcode::GetNode;
  using Reply = NodeData;
  NodeKey key;
  friend bool operator==(const GetNodeReq&, const GetNodeReq&) = default;
};
struct RegisterReq {
  static constexpr Opcode kOp = Opcode::Register;
  using Reply = Ack;
  std::string addr;
  friend bool operator==(const RegisterReq&, const RegisterReq&) = default;
};
struct AllocateReq {
  static constexpr Opcode kOp = Opcode::Allocate;
  using Reply = AddrList;
  std::uint32_t n = 0;
  friend bool operator==(const AllocateReq&, const AllocateReq&) = default;
};
struct ReportReq {
  static constexpr Opcode kOp = Opcode::Report;
  using Reply = Ack;
  std::string addr;
  std::uint64_t pages = 0;
  friend bool operator==(const ReportReq&, const ReportReq&) = default;
};
struct CreateBlobReq {
  static constexpr Opcode kOp = Opcode::CreateBlob;
  using Reply = BlobIdReply;
  std::uint64_t psize = 0;
  friend bool operator==(const CreateBlobReq&, const CreateBlobReq&) = default;
};
struct AssignVersionReq {
  static constexpr Opcode kOp = Opcode::AssignVersion;
  using Reply = TicketReply;
  BlobId blob;
  UpdateKind kind = UpdateKind::Write;
  /// Ignored for APPEND.
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
  friend bool operator==(const AssignVersionReq&, const AssignVersionReq&) = default;
};
struct NotifySuccessReq {
  static constexpr Opcode kOp = Opcode::NotifySuccess;
  using Reply = Ack;
  BlobId blob;
  Version version = 0;
  friend bool operator==(const NotifySuccessReq&, const NotifySuccessReq&) = default;
};
struct GetRecentReq {
  static constexpr Opcode kOp = Opcode::GetRecent;
  using Reply = VersionReply;
  BlobId blob;
  friend bool operator==(const GetRecentReq&, const GetRecentReq&) = default;
};
struct GetSizeReq {
  static constexpr Opcode kOp = Opcode::GetSize;
  using Reply = SizeReply;
  BlobId blob;
  Version version = 0;
  friend bool operator==(const GetSizeReq&, const GetSizeReq&) = default;
};
struct WaitPublishedReq {
  static constexpr Opcode kOp = Opcode::WaitPublished;
  using Reply = Ack;
  BlobId blob;
  Version version = 0;
  /// 0 waits without deadline.
  std::uint64_t timeout_ms = 0;
  friend bool operator==(const WaitPublishedReq&, const WaitPublishedReq&) = default;
};
struct BranchReq {
  static constexpr Opcode kOp = Opcode::Branch;
  using Reply = BlobIdReply;
  BlobId blob;
  Version version = 0;
  friend bool operator==(const BranchReq&, const BranchReq&) = default;
};
struct BlobInfoReq {
  static constexpr Opcode kOp = Opcode::BlobInfo;
  using Reply = BlobInfoReply;
  BlobId blob;
  friend bool operator==(const BlobInfoReq&, const BlobInfoReq&) = default;
};

using Request = std::variant<PutPageReq, GetPageReq, UsageReq, PutNodeReq, GetNodeReq, RegisterReq, AllocateReq,
                             ReportReq, CreateBlobReq, AssignVersionReq, NotifySuccessReq, GetRecentReq, GetSizeReq,
                             WaitPublishedReq, BranchReq, BlobInfoReq>;

using Reply = std::variant<Ack, PageData, UsageReply, NodeData, AddrList, BlobIdReply, TicketReply, VersionReply,
                           SizeReply, BlobInfoReply, ErrorReply>;

Opcode opcode_of(const Request& request);

Frame request_frame(const Request& request, std::uint64_t request_id);
/// Errc::Unsupported for unknown opcodes, Errc::Malformed for bad bodies.
Request parse_request(const Frame& frame);

/// ErrorReply is sent with opcode ERROR; anything else echoes request_op.
Frame reply_frame(Opcode request_op, std::uint64_t request_id, const Reply& reply);
Reply parse_reply(Opcode request_op, const Frame& frame);

}  // namespace vblob::rpc
