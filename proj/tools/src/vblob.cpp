// vblob: command line front end for blobs, benchmarks and servers.

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "vblob/bench/config.hpp"
#include "vblob/bench/deployment.hpp"
#include "vblob/bench/experiments.hpp"
#include "vblob/bench/suite.hpp"
#include "vblob/client.hpp"
#include "vblob/error.hpp"
#include "vblob/rpc/services.hpp"

using namespace vblob;
using namespace vblob::bench;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

Bytes read_input(const std::string& path) {
  std::istreambuf_iterator<char> end;
  if (path.empty() || path == "-") return Bytes(std::istreambuf_iterator<char>(std::cin), end);
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::NotFound, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), end);
}

void write_output(const std::string& path, const Bytes& data) {
  if (path.empty() || path == "-") {
    std::cout.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::InvalidArgument, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

/// Blocks SIGINT and SIGTERM in every thread started afterwards; call first.
sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

void wait_for_stop(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
}

struct Settings {
  std::string config_file;
  Config config;

  // Cluster endpoints for blob commands.
  std::string versioner, allocator, metastores;

  void load() {
    config = Config::load(config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file));
    if (versioner.empty()) versioner = config.get_or("versioner", "");
    if (allocator.empty()) allocator = config.get_or("allocator", "");
    if (metastores.empty()) metastores = config.get_or("metastores", "");
  }

  ClusterConfig cluster() const {
    if (versioner.empty() || allocator.empty() || metastores.empty()) {
      raise(Errc::InvalidArgument, "need versioner, allocator and metastores endpoints (flags, config or VBLOB_*)");
    }
    return ClusterConfig{versioner, allocator, split_list(metastores)};
  }
};

void add_blob_commands(CLI::App& app, Settings& s) {
  auto* blob = app.add_subcommand("blob", "Blob operations against a running cluster")->require_subcommand(1)->fallthrough();
  blob->add_option("--endpoint,--versioner", s.versioner, "Version manager endpoint (host:port)");
  blob->add_option("--allocator", s.allocator, "Provider manager endpoint");
  blob->add_option("--metastores", s.metastores, "Comma-separated metadata store endpoints");

  static std::string id, in, out;
  static std::uint64_t psize = 64 * 1024, offset = 0, version = 0, timeout_ms = 0;
  static std::optional<std::uint64_t> size;
  static bool wait = false, has_version = false;

  auto handle = [&](Client& c) { return c.open(BlobId::from_hex(id)); };
  auto version_or_recent = [&](Client& c, const BlobHandle& h) { return has_version ? version : c.get_recent(h); };

  auto* create = blob->add_subcommand("create", "Create a blob; prints its id");
  create->add_option("--psize", psize, "Page size in bytes (power of two)");
  create->callback([&] {
    s.load();
    Client c(s.cluster());
    std::cout << c.create(psize).id.hex() << "\n";
  });

  auto* write = blob->add_subcommand("write", "Write --in (or stdin) at --offset; prints the version");
  write->add_option("--id", id)->required();
  write->add_option("--offset", offset)->required();
  write->add_option("--in", in, "Input file, '-' for stdin");
  write->add_flag("--sync", wait, "Wait until the version is published");
  write->callback([&] {
    s.load();
    Client c(s.cluster());
    auto h = handle(c);
    auto v = c.write(h, read_input(in), offset);
    if (wait) c.sync(h, v);
    std::cout << v << "\n";
  });

  auto* append = blob->add_subcommand("append", "Append --in (or stdin); prints the version");
  append->add_option("--id", id)->required();
  append->add_option("--in", in, "Input file, '-' for stdin");
  append->add_flag("--sync", wait, "Wait until the version is published");
  append->callback([&] {
    s.load();
    Client c(s.cluster());
    auto h = handle(c);
    auto v = c.append(h, read_input(in));
    if (wait) c.sync(h, v);
    std::cout << v << "\n";
  });

  auto* read = blob->add_subcommand("read", "Read bytes of a published version to --out (or stdout)");
  read->add_option("--id", id)->required();
  read->add_option("--version", version, "Defaults to the latest published version")
      ->each([&](const std::string&) { has_version = true; });
  read->add_option("--offset", offset);
  read->add_option("--size", size, "Defaults to the rest of the snapshot");
  read->add_option("--out", out, "Output file, '-' for stdout");
  read->callback([&] {
    s.load();
    Client c(s.cluster());
    auto h = handle(c);
    const auto v = version_or_recent(c, h);
    const auto total = c.get_size(h, v);
    const auto n = size.value_or(total > offset ? total - offset : 0);
    write_output(out, c.read(h, v, offset, n));
  });

  auto* sz = blob->add_subcommand("size", "Size of a published version");
  sz->add_option("--id", id)->required();
  sz->add_option("--version", version)->each([&](const std::string&) { has_version = true; });
  sz->callback([&] {
    s.load();
    Client c(s.cluster());
    auto h = handle(c);
    std::cout << c.get_size(h, version_or_recent(c, h)) << "\n";
  });

  auto* recent = blob->add_subcommand("recent", "Latest published version");
  recent->add_option("--id", id)->required();
  recent->callback([&] {
    s.load();
    Client c(s.cluster());
    std::cout << c.get_recent(handle(c)) << "\n";
  });

  auto* sync = blob->add_subcommand("sync", "Wait until --version is published");
  sync->add_option("--id", id)->required();
  sync->add_option("--version", version)->required();
  sync->add_option("--timeout-ms", timeout_ms, "0 waits without limit");
  sync->callback([&] {
    s.load();
    Client c(s.cluster());
    c.sync(handle(c), version,
           timeout_ms ? std::optional(std::chrono::milliseconds(timeout_ms)) : std::nullopt);
  });

  auto* branch = blob->add_subcommand("branch", "Branch at a published version; prints the new id");
  branch->add_option("--id", id)->required();
  branch->add_option("--version", version)->required();
  branch->callback([&] {
    s.load();
    Client c(s.cluster());
    std::cout << c.branch(handle(c), version).id.hex() << "\n";
  });
}

void add_bench_commands(CLI::App& app, Settings& s) {
  auto* bench = app.add_subcommand("bench", "Experiments on an in-process deployment")->require_subcommand(1)->fallthrough();
  static std::string transport = "loopback", csv, readers_list = "1,2,4,8,16";
  static std::size_t providers = 8, metastores = 4;
  bench->add_option("--transport", transport, "loopback or tcp");
  bench->add_option("--providers", providers, "Data providers");
  bench->add_option("--metastore-count", metastores, "Metadata stores");
  bench->add_option("--csv", csv, "Also write plotted samples as CSV");

  auto deployment = [&] {
    s.load();
    DeploymentOptions o;
    o.transport = parse_transport(s.config.get_or("transport", transport));
    o.data_providers = s.config.get_u64("providers", providers);
    o.metastores = s.config.get_u64("metastore_count", metastores);
    return std::make_unique<Deployment>(o);
  };
  auto emit = [&](const RunReport& r) {
    r.write_text(std::cout);
    if (!csv.empty()) {
      std::ofstream f(csv);
      r.write_csv(f);
    }
    if (!r.passed()) throw Error(Errc::CheckFailed, "CHECK_FAILED: " + r.name);
  };

  static AppendGrowthOptions growth;
  auto* ag = bench->add_subcommand("append-growth", "One-page appends to a fresh blob");
  ag->add_option("--pages", growth.pages);
  ag->add_option("--psize", growth.psize);
  ag->add_option("--window", growth.window, "Appends per throughput sample");
  ag->callback([&] {
    auto d = deployment();
    emit(bench_append_growth(*d, growth));
  });

  static ReadConcurrencyOptions rc;
  static double link_mb_s = 117.5;
  static std::uint64_t latency_us = 100;
  auto* rcc = bench->add_subcommand("read-concurrency", "Concurrent readers of disjoint chunks");
  rcc->add_option("--readers", readers_list, "Comma-separated reader counts");
  rcc->add_option("--chunk", rc.chunk);
  rcc->add_option("--psize", rc.psize);
  rcc->add_option("--repetitions", rc.repetitions);
  rcc->add_option("--link-mb-s", link_mb_s, "Per-client link bandwidth in MB/s, 0 for none");
  rcc->add_option("--latency-us", latency_us, "Per-call link latency");
  rcc->callback([&] {
    rc.readers.clear();
    for (const auto& n : split_list(readers_list)) rc.readers.push_back(std::stoul(n));
    rc.link = rpc::LinkModel{link_mb_s * 1e6, std::chrono::microseconds(latency_us)};
    auto d = deployment();
    emit(bench_read_concurrency(*d, rc));
  });

  static SuiteOptions suite;
  auto* rs = bench->add_subcommand("random-suite", "Seeded concurrent history checked against the oracle");
  rs->add_option("--seed", suite.seed);
  rs->add_option("--ops", suite.ops);
  rs->add_option("--writers", suite.writers);
  rs->add_option("--readers", suite.readers);
  rs->add_option("--min-branches", suite.min_branches);
  rs->callback([&] {
    auto d = deployment();
    suite.seed = s.config.get_u64("seed", suite.seed);
    emit(run_random_suite(*d, suite));
  });
}

struct Served {
  std::vector<std::unique_ptr<rpc::TcpServer>> servers;

  std::string serve(std::shared_ptr<rpc::Service> svc, const std::string& host, std::uint16_t port) {
    servers.push_back(std::make_unique<rpc::TcpServer>(std::move(svc), host, port));
    return servers.back()->endpoint();
  }
};

void add_serve_commands(CLI::App& app, Settings& s, const sigset_t& stop) {
  auto* serve = app.add_subcommand("serve", "Run one role (or a whole cluster) over TCP")->require_subcommand(1)->fallthrough();
  static std::string listen = "127.0.0.1:0", alloc_ep, advertise, dir, write_config;
  static std::uint64_t capacity = 0, report_ms = 1000;
  static std::size_t providers = 8, metastores = 4;
  serve->add_option("--listen", listen, "host:port; port 0 picks one");

  auto listen_addr = [&] {
    s.load();
    return rpc::parse_host_port(s.config.get_or("listen", listen));
  };
  auto announce = [](const std::string& role, const std::string& ep) {
    std::cout << role << "=" << ep << std::endl;
  };

  auto* prov = serve->add_subcommand("provider", "Data provider");
  prov->add_option("--allocator", alloc_ep, "Provider manager to register with")->required();
  prov->add_option("--advertise", advertise, "Address given to the allocator (default: listen address)");
  prov->add_option("--dir", dir, "Write-through page directory");
  prov->add_option("--capacity", capacity, "Byte capacity, 0 for unlimited");
  prov->add_option("--report-ms", report_ms, "Load report interval");
  prov->callback([&] {
    auto [host, port] = listen_addr();
    PageStoreOptions o;
    if (capacity) o.capacity_bytes = capacity;
    if (!dir.empty()) o.directory = dir;
    auto store = std::make_shared<PageStore>(o);
    Served sv;
    const auto ep = sv.serve(std::make_shared<rpc::PageStoreService>(store), host, port);
    const auto addr = advertise.empty() ? ep : advertise;
    rpc::Connector conn;
    rpc::RemoteProviderManager pm(conn.channel(alloc_ep));
    pm.register_provider(addr);
    announce("provider", addr);
    std::atomic<bool> stopping{false};
    std::thread reporter([&] {
      while (!stopping) {
        std::this_thread::sleep_for(std::chrono::milliseconds(report_ms));
        try {
          pm.report(addr, store->usage().page_count);
        } catch (const Error& e) {
          std::cerr << "report failed: " << e.what() << "\n";
        }
      }
    });
    wait_for_stop(stop);
    stopping = true;
    reporter.join();
  });

  auto* meta = serve->add_subcommand("metastore", "Metadata store");
  meta->callback([&] {
    auto [host, port] = listen_addr();
    Served sv;
    announce("metastore", sv.serve(std::make_shared<rpc::MetaStoreService>(std::make_shared<MetaStore>()), host, port));
    wait_for_stop(stop);
  });

  auto* alloc = serve->add_subcommand("allocator", "Provider manager");
  alloc->callback([&] {
    auto [host, port] = listen_addr();
    Served sv;
    announce("allocator",
             sv.serve(std::make_shared<rpc::ProviderManagerService>(std::make_shared<ProviderManager>()), host, port));
    wait_for_stop(stop);
  });

  auto* vers = serve->add_subcommand("versioner", "Version manager");
  vers->callback([&] {
    auto [host, port] = listen_addr();
    Served sv;
    announce("versioner",
             sv.serve(std::make_shared<rpc::VersionManagerService>(std::make_shared<VersionManager>()), host, port));
    wait_for_stop(stop);
  });

  auto* cluster = serve->add_subcommand("cluster", "Every role in one process on consecutive ports");
  cluster->add_option("--providers", providers);
  cluster->add_option("--metastores", metastores);
  cluster->add_option("--write-config", write_config, "Write the client settings to this file");
  cluster->callback([&] {
    auto [host, first_port] = listen_addr();
    std::uint16_t port = first_port;
    auto next = [&port]() -> std::uint16_t { return port == 0 ? 0 : port++; };
    Served sv;
    auto pm = std::make_shared<ProviderManager>();
    const auto vers_ep = sv.serve(std::make_shared<rpc::VersionManagerService>(std::make_shared<VersionManager>()),
                                  host, next());
    const auto alloc_ep2 = sv.serve(std::make_shared<rpc::ProviderManagerService>(pm), host, next());
    std::vector<std::string> metas;
    for (std::size_t i = 0; i < metastores; ++i) {
      metas.push_back(sv.serve(std::make_shared<rpc::MetaStoreService>(std::make_shared<MetaStore>()), host, next()));
    }
    std::vector<std::shared_ptr<PageStore>> stores;
    for (std::size_t i = 0; i < providers; ++i) {
      stores.push_back(std::make_shared<PageStore>());
      pm->register_provider(sv.serve(std::make_shared<rpc::PageStoreService>(stores.back()), host, next()));
    }
    std::ostringstream cfg;
    cfg << "versioner=" << vers_ep << "\nallocator=" << alloc_ep2 << "\nmetastores=" << join(metas) << "\n";
    std::cout << cfg.str() << std::flush;
    if (!write_config.empty()) std::ofstream(write_config) << cfg.str();
    wait_for_stop(stop);
  });
}

}  // namespace

int main(int argc, char** argv) {
  const sigset_t stop = block_stop_signals();
  CLI::App app{"vblob: versioned blob store"};
  app.require_subcommand(1);
  app.fallthrough();
  Settings settings;
  app.add_option("--config", settings.config_file, "key=value settings file; VBLOB_<KEY> variables override it");

  add_blob_commands(app, settings);
  add_bench_commands(app, settings);
  add_serve_commands(app, settings, stop);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == Errc::CheckFailed ? 3 : 1;
  }
  return 0;
}
