#include "vblob/allocator.hpp"

#include <algorithm>

#include "vblob/error.hpp"

namespace vblob {

std::size_t LeastLoadedPolicy::pick(std::span<const ProviderInfo> providers) {
  auto min_load = std::min_element(providers.begin(), providers.end(), [](const auto& a, const auto& b) {
                    return a.load < b.load;
                  })->load;
  const std::size_t n = providers.size();
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t i = (cursor_ + step) % n;
    if (providers[i].load == min_load) {
      cursor_ = (i + 1) % n;
      return i;
    }
  }
  return 0;  // unreachable: some provider carries the minimum
}

ProviderManager::ProviderManager(std::unique_ptr<PlacementPolicy> policy) : policy_(std::move(policy)) {}

void ProviderManager::register_provider(const std::string& addr) {
  std::lock_guard lock(mu_);
  auto now = std::chrono::steady_clock::now();
  for (auto& p : providers_) {
    if (p.addr == addr) {
      p.last_heartbeat = now;
      return;
    }
  }
  providers_.push_back(ProviderInfo{addr, 0, now});
}

std::vector<std::string> ProviderManager::allocate(std::size_t n) {
  std::lock_guard lock(mu_);
  if (providers_.empty()) raise(Errc::NoProviders, "no data provider registered");
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    auto i = policy_->pick(providers_);
    providers_[i].load += 1;
    out.push_back(providers_[i].addr);
  }
  return out;
}

void ProviderManager::report(const std::string& addr, std::uint64_t pages) {
  std::lock_guard lock(mu_);
  for (auto& p : providers_) {
    if (p.addr == addr) {
      p.load = pages;
      p.last_heartbeat = std::chrono::steady_clock::now();
      return;
    }
  }
  raise(Errc::UnknownProvider, addr);
}

std::vector<ProviderInfo> ProviderManager::providers() const {
  std::lock_guard lock(mu_);
  return providers_;
}

}  // namespace vblob
