#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace vblob {

struct ProviderInfo {
  std::string addr;
  /// Last reported page count plus optimistic increments from allocate().
  std::uint64_t load = 0;
  std::chrono::steady_clock::time_point last_heartbeat;
};

/// Chooses the provider for one page slot.
class PlacementPolicy {
 public:
  virtual ~PlacementPolicy() = default;
  /// Index into providers (never empty). May update its own cursor state.
  virtual std::size_t pick(std::span<const ProviderInfo> providers) = 0;
};

/// Least estimated load; ties broken round-robin in registration order.
class LeastLoadedPolicy final : public PlacementPolicy {
 public:
  std::size_t pick(std::span<const ProviderInfo> providers) override;

 private:
  std::size_t cursor_ = 0;
};

/// The provider manager: registry of data providers and page placement.
class ProviderManager {
 public:
  explicit ProviderManager(std::unique_ptr<PlacementPolicy> policy = std::make_unique<LeastLoadedPolicy>());

  /// Re-registration only refreshes the heartbeat.
  void register_provider(const std::string& addr);

  /// n addresses; repeats when n exceeds the provider count.
  /// Errc::NoProviders on an empty registry.
  std::vector<std::string> allocate(std::size_t n);

  /// Replaces the load estimate. Errc::UnknownProvider.
  void report(const std::string& addr, std::uint64_t pages);

  std::vector<ProviderInfo> providers() const;

 private:
  mutable std::mutex mu_;
  std::unique_ptr<PlacementPolicy> policy_;
  std::vector<ProviderInfo> providers_;
};

}  // namespace vblob
