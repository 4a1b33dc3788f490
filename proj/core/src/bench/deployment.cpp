#include "vblob/bench/deployment.hpp"

#include <atomic>

#include "vblob/error.hpp"
#include "vblob/rpc/services.hpp"

namespace vblob::bench {

Transport parse_transport(const std::string& name) {
  if (name == "loopback" || name == "mem") return Transport::Loopback;
  if (name == "tcp") return Transport::Tcp;
  raise(Errc::InvalidArgument, "unknown transport '" + name + "' (loopback or tcp)");
}

std::string to_string(Transport t) { return t == Transport::Tcp ? "tcp" : "loopback"; }

Deployment::Deployment(DeploymentOptions options) : options_(options) {
  static std::atomic<std::uint64_t> counter{0};
  prefix_ = "cluster" + std::to_string(counter++);

  versioner_ = std::make_shared<VersionManager>();
  allocator_ = std::make_shared<ProviderManager>();
  cluster_.versioner = serve(std::make_shared<rpc::VersionManagerService>(versioner_), "versioner");
  cluster_.allocator = serve(std::make_shared<rpc::ProviderManagerService>(allocator_), "allocator");

  for (std::size_t i = 0; i < options_.metastores; ++i) {
    auto store = std::make_shared<MetaStore>();
    metastores_.push_back(store);
    cluster_.metastores.push_back(
        serve(std::make_shared<rpc::MetaStoreService>(store, options_.metastore_delay), "meta" + std::to_string(i)));
  }
  for (std::size_t i = 0; i < options_.data_providers; ++i) {
    auto store = std::make_shared<PageStore>(PageStoreOptions{options_.provider_capacity, std::nullopt});
    page_stores_.push_back(store);
    auto addr =
        serve(std::make_shared<rpc::PageStoreService>(store, options_.provider_delay), "provider" + std::to_string(i));
    provider_addrs_.push_back(addr);
    allocator_->register_provider(addr);
  }
}

Deployment::~Deployment() {
  for (auto& s : servers_) s->stop();
  for (const auto& name : loopback_names_) rpc::LoopbackRegistry::instance().unbind(name);
}

std::string Deployment::serve(std::shared_ptr<rpc::Service> service, const std::string& role) {
  if (options_.transport == Transport::Loopback) {
    auto name = prefix_ + "/" + role;
    rpc::LoopbackRegistry::instance().bind(name, std::move(service));
    loopback_names_.push_back(name);
    return "mem://" + name;
  }
  servers_.push_back(std::make_unique<rpc::TcpServer>(std::move(service), "127.0.0.1", 0));
  return servers_.back()->endpoint();
}

std::size_t Deployment::node_count() const {
  std::size_t n = 0;
  for (const auto& m : metastores_) n += m->node_count();
  return n;
}

PageUsage Deployment::page_usage() const {
  PageUsage total;
  for (const auto& p : page_stores_) {
    auto u = p->usage();
    total.page_count += u.page_count;
    total.byte_count += u.byte_count;
  }
  return total;
}

std::map<std::string, std::uint64_t> Deployment::provider_page_counts() const {
  std::map<std::string, std::uint64_t> out;
  for (std::size_t i = 0; i < page_stores_.size(); ++i) {
    out["provider" + std::to_string(i)] = page_stores_[i]->usage().page_count;
  }
  return out;
}

void Deployment::report_loads() {
  for (std::size_t i = 0; i < page_stores_.size(); ++i) {
    allocator_->report(provider_addrs_[i], page_stores_[i]->usage().page_count);
  }
}

}  // namespace vblob::bench
