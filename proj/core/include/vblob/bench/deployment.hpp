#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vblob/allocator.hpp"
#include "vblob/client.hpp"
#include "vblob/metastore.hpp"
#include "vblob/pagestore.hpp"
#include "vblob/rpc/transport.hpp"
#include "vblob/versioner.hpp"

namespace vblob::bench {

enum class Transport { Loopback, Tcp };

/// "loopback" / "mem" or "tcp"; Errc::InvalidArgument otherwise.
Transport parse_transport(const std::string& name);
std::string to_string(Transport t);

struct DeploymentOptions {
  std::size_t data_providers = 8;
  std::size_t metastores = 4;
  Transport transport = Transport::Loopback;
  /// Per-request service time added by every data provider.
  std::chrono::microseconds provider_delay{0};
  /// Per-request service time added by every metadata store.
  std::chrono::microseconds metastore_delay{0};
  std::optional<std::uint64_t> provider_capacity;
};

/// A whole cluster in one process: version manager, provider manager, data
/// providers and metadata stores, each behind its own endpoint.
class Deployment {
 public:
  explicit Deployment(DeploymentOptions options = {});
  ~Deployment();
  Deployment(const Deployment&) = delete;
  Deployment& operator=(const Deployment&) = delete;

  const ClusterConfig& cluster() const noexcept { return cluster_; }
  const DeploymentOptions& options() const noexcept { return options_; }

  VersionManager& versioner() { return *versioner_; }
  ProviderManager& allocator() { return *allocator_; }
  const std::vector<std::shared_ptr<PageStore>>& page_stores() const { return page_stores_; }
  const std::vector<std::shared_ptr<MetaStore>>& metastores() const { return metastores_; }
  const std::vector<std::string>& provider_addrs() const { return provider_addrs_; }

  std::size_t node_count() const;
  PageUsage page_usage() const;
  /// Keyed "provider<i>" so reports do not depend on endpoint names.
  std::map<std::string, std::uint64_t> provider_page_counts() const;
  /// Pushes every provider's current page count to the allocator.
  void report_loads();

 private:
  std::string serve(std::shared_ptr<rpc::Service> service, const std::string& role);

  DeploymentOptions options_;
  std::string prefix_;
  ClusterConfig cluster_;
  std::shared_ptr<VersionManager> versioner_;
  std::shared_ptr<ProviderManager> allocator_;
  std::vector<std::shared_ptr<PageStore>> page_stores_;
  std::vector<std::shared_ptr<MetaStore>> metastores_;
  std::vector<std::string> provider_addrs_;
  std::vector<std::string> loopback_names_;
  std::vector<std::unique_ptr<rpc::TcpServer>> servers_;
};

}  // namespace vblob::bench
