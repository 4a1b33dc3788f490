#pragma once

#include <chrono>
#include <memory>

#include "vblob/allocator.hpp"
#include "vblob/metastore.hpp"
#include "vblob/pagestore.hpp"
#include "vblob/rpc/transport.hpp"
#include "vblob/versioner.hpp"

namespace vblob::rpc {

/// PUT_PAGE, GET_PAGE, USAGE.
class PageStoreService final : public Dispatcher {
 public:
  explicit PageStoreService(std::shared_ptr<PageStore> store, std::chrono::microseconds delay = {})
      : store_(std::move(store)), delay_(delay) {}

 protected:
  Reply dispatch(const Request& request) override;
  /// GET_PAGE replies are encoded straight from the stored object.
  std::optional<Frame> dispatch_frame(const Frame& request) override;

 private:
  std::shared_ptr<PageStore> store_;
  /// Artificial service time, used to emulate slow providers.
  std::chrono::microseconds delay_;
};

/// PUT_NODE, GET_NODE.
class MetaStoreService final : public Dispatcher {
 public:
  explicit MetaStoreService(std::shared_ptr<MetaStore> store, std::chrono::microseconds delay = {})
      : store_(std::move(store)), delay_(delay) {}

 protected:
  Reply dispatch(const Request& request) override;

 private:
  std::shared_ptr<MetaStore> store_;
  std::chrono::microseconds delay_;
};

/// REGISTER, ALLOCATE, REPORT.
class ProviderManagerService final : public Dispatcher {
 public:
  explicit ProviderManagerService(std::shared_ptr<ProviderManager> manager) : manager_(std::move(manager)) {}

 protected:
  Reply dispatch(const Request& request) override;

 private:
  std::shared_ptr<ProviderManager> manager_;
};

/// CREATE_BLOB, ASSIGN_VERSION, NOTIFY_SUCCESS, GET_RECENT, GET_SIZE,
/// WAIT_PUBLISHED, BRANCH, BLOB_INFO.
class VersionManagerService final : public Dispatcher {
 public:
  explicit VersionManagerService(std::shared_ptr<VersionManager> manager) : manager_(std::move(manager)) {}

 protected:
  Reply dispatch(const Request& request) override;

 private:
  std::shared_ptr<VersionManager> manager_;
};

}  // namespace vblob::rpc
