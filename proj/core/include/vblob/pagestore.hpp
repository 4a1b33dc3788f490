#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>

#include "vblob/types.hpp"

namespace vblob {

struct PageStoreOptions {
  /// Total stored bytes allowed; unlimited when unset.
  std::optional<std::uint64_t> capacity_bytes;
  /// Write-through directory, one file per page named by the 32-char pid.
  std::optional<std::filesystem::path> directory;
};

struct PageUsage {
  std::uint64_t page_count = 0;
  std::uint64_t byte_count = 0;
  friend bool operator==(const PageUsage&, const PageUsage&) = default;
};

/// A data provider: stores immutable page objects in memory.
class PageStore {
 public:
  explicit PageStore(PageStoreOptions options = {});

  /// Idempotent on identical payloads. Errc::Conflict on a differing payload,
  /// Errc::StoreFull past the capacity, Errc::InvalidArgument on empty pages.
  void put_page(const PageId& pid, Bytes bytes);

  /// bytes[off, off + len) of the stored object. Errc::NotFound, Errc::Range.
  Bytes get_page(const PageId& pid, std::uint64_t off, std::uint64_t len) const;

  /// Same extent without copying; the view keeps the object alive.
  struct PageView {
    std::shared_ptr<const Bytes> owner;
    std::span<const std::uint8_t> bytes;
  };
  PageView view_page(const PageId& pid, std::uint64_t off, std::uint64_t len) const;

  PageUsage usage() const;
  bool contains(const PageId& pid) const;

 private:
  void load_directory();

  PageStoreOptions options_;
  mutable std::shared_mutex mu_;
  std::unordered_map<PageId, std::shared_ptr<const Bytes>> pages_;
  PageUsage usage_;
};

}  // namespace vblob
