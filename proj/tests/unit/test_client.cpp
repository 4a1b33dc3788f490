#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <thread>

#include "errc.hpp"
#include "vblob/bench/deployment.hpp"
#include "vblob/bench/oracle.hpp"
#include "vblob/client.hpp"

using namespace vblob;
using namespace vblob::bench;
using namespace std::chrono_literals;

namespace vblob::bench {
void PrintTo(Transport t, std::ostream* os) { *os << to_string(t); }
}  // namespace vblob::bench

namespace {

Bytes pattern(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

class ClientTest : public ::testing::TestWithParam<Transport> {
 protected:
  void SetUp() override { start({}); }

  void start(DeploymentOptions o) {
    o.transport = GetParam();
    if (o.data_providers == DeploymentOptions{}.data_providers) o.data_providers = 4;
    o.metastores = 2;
    client_.reset();
    dep_ = std::make_unique<Deployment>(o);
    client_ = std::make_unique<Client>(dep_->cluster());
  }

  std::unique_ptr<Deployment> dep_;
  std::unique_ptr<Client> client_;
};

std::string transport_name(const ::testing::TestParamInfo<Transport>& info) { return to_string(info.param); }

}  // namespace

TEST_P(ClientTest, Create) {
  EXPECT_ERRC(client_->create(1000), Errc::BadPageSize);
  auto h = client_->create(65536);
  EXPECT_EQ(h.psize, 65536u);
  EXPECT_EQ(client_->get_recent(h), 0u);
  EXPECT_EQ(client_->get_size(h, 0), 0u);
  EXPECT_TRUE(client_->read(h, 0, 0, 0).empty());
  auto reopened = client_->open(h.id);
  EXPECT_EQ(reopened.psize, 65536u);
}

TEST_P(ClientTest, RoundTrip) {
  auto h = client_->create(4096);
  auto data = pattern(4 * 4096, 1);
  EXPECT_EQ(client_->write(h, data, 0), 1u);
  client_->sync(h, 1);
  EXPECT_EQ(client_->read(h, 1, 0, data.size()), data);
  EXPECT_EQ(client_->read(h, 1, 5000, 100), Bytes(data.begin() + 5000, data.begin() + 5100));
  EXPECT_EQ(client_->write(h, pattern(10, 2), 0), 2u);
  client_->sync(h, 2);
  EXPECT_EQ(client_->get_recent(h), 2u);
}

TEST_P(ClientTest, ReadErrors) {
  auto h = client_->create(4096);
  client_->sync(h, client_->append(h, pattern(4 * 4096, 1)));
  const auto size = client_->get_size(h, 1);
  EXPECT_ERRC(client_->read(h, 1, size - 10, 11), Errc::OutOfBounds);
  EXPECT_ERRC(client_->read(h, 1, size + 1, 0), Errc::OutOfBounds);
  // Version 2 is assigned by a writer that has not finished.
  dep_->versioner().assign_version(h.id, UpdateKind::Append, std::nullopt, 1);
  EXPECT_ERRC(client_->read(h, 2, 0, 1), Errc::NotPublished);
  EXPECT_ERRC(client_->get_size(h, 2), Errc::NotPublished);
  EXPECT_ERRC(client_->branch(h, 2), Errc::NotPublished);
  EXPECT_ERRC(client_->write(h, pattern(1, 1), size + 2), Errc::OffsetBeyondEnd);
  EXPECT_ERRC(client_->append(h, Bytes{}), Errc::InvalidArgument);
}

TEST_P(ClientTest, OverwriteSharesPages) {
  auto h = client_->create(4096);
  client_->sync(h, client_->write(h, pattern(4 * 4096, 1), 0));
  client_->sync(h, client_->write(h, pattern(2 * 4096, 2), 4096));
  auto v1 = client_->locate(h, 1, 0, 4 * 4096);
  auto v2 = client_->locate(h, 2, 0, 4 * 4096);
  ASSERT_EQ(v1.size(), 4u);
  ASSERT_EQ(v2.size(), 4u);
  EXPECT_EQ(v1[0].pid, v2[0].pid);
  EXPECT_EQ(v1[3].pid, v2[3].pid);
  EXPECT_NE(v1[1].pid, v2[1].pid);
  EXPECT_NE(v1[2].pid, v2[2].pid);
  EXPECT_EQ(dep_->page_usage().page_count, 6u);
}

TEST_P(ClientTest, UnalignedWrite) {
  const std::uint64_t P = 1024;
  auto h = client_->create(P);
  OracleBlob oracle;
  auto base = pattern(4 * P, 1);
  client_->sync(h, client_->write(h, base, 0));
  oracle.apply({UpdateKind::Write, 0, base});
  auto patch = pattern(200, 2);
  auto v = client_->write(h, patch, P + 100);
  client_->sync(h, v);
  oracle.apply({UpdateKind::Write, P + 100, patch});
  EXPECT_EQ(client_->read(h, 2, 0, 4 * P), oracle.snapshot(2));
  // Straddling pages and growing the blob.
  auto tail = pattern(3 * P, 3);
  client_->sync(h, client_->write(h, tail, 3 * P + 500));
  oracle.apply({UpdateKind::Write, 3 * P + 500, tail});
  auto odd = pattern(777, 4);
  client_->sync(h, client_->append(h, odd));
  oracle.apply({UpdateKind::Append, 0, odd});
  for (Version u = 0; u <= 4; ++u) EXPECT_EQ(client_->read(h, u, 0, oracle.size(u)), oracle.snapshot(u)) << u;
  EXPECT_EQ(client_->read(h, 4, 1000, 3000), oracle.read(4, 1000, 3000));
}

TEST_P(ClientTest, FifthPageGrowsRoot) {
  const std::uint64_t P = 4096;
  auto h = client_->create(P);
  client_->sync(h, client_->append(h, pattern(4 * P, 1)));
  EXPECT_TRUE(client_->node_store().find_node(NodeKey{h.id, 1, NodePos{0, 4}}).has_value());
  client_->sync(h, client_->append(h, pattern(P, 2)));
  EXPECT_EQ(client_->get_size(h, 2), 5 * P);
  auto root = client_->node_store().get_node(NodeKey{h.id, 2, NodePos{0, 8}});
  EXPECT_EQ(root.as_inner(), (InnerNode{1, 2}));
  EXPECT_EQ(client_->read(h, 2, 4 * P, P), pattern(P, 2));
}

TEST_P(ClientTest, ConcurrentAppenders) {
  const std::uint64_t P = 1024;
  const int N = 16;
  auto h = client_->create(P);
  std::vector<std::thread> threads;
  std::vector<Version> versions(N);
  for (int i = 0; i < N; ++i) {
    threads.emplace_back([&, i] {
      Client own(dep_->cluster());
      versions[i] = own.append(h, pattern(P, 100 + i));
    });
  }
  for (auto& t : threads) t.join();
  client_->sync(h, N);
  EXPECT_EQ(client_->get_size(h, N), N * P);
  // Page k holds the payload of the appender that got version k + 1.
  auto all = client_->read(h, N, 0, N * P);
  for (int i = 0; i < N; ++i) {
    const auto k = versions[i] - 1;
    EXPECT_EQ(Bytes(all.begin() + k * P, all.begin() + (k + 1) * P), pattern(P, 100 + i));
  }
}

TEST_P(ClientTest, ReadYourWrites) {
  auto h = client_->create(1024);
  OracleBlob oracle;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 30; ++i) {
    auto size = oracle.size(oracle.latest());
    auto data = pattern(1 + rng() % 3000, i);
    Version v;
    if (size == 0 || rng() % 2) {
      v = client_->append(h, data);
      oracle.apply({UpdateKind::Append, 0, data});
    } else {
      auto off = rng() % size;
      v = client_->write(h, data, off);
      oracle.apply({UpdateKind::Write, off, data});
    }
    client_->sync(h, v);
    EXPECT_EQ(client_->read(h, v, 0, oracle.size(v)), oracle.snapshot(v));
  }
}

TEST_P(ClientTest, BranchDiverges) {
  const std::uint64_t P = 1024;
  auto h = client_->create(P);
  OracleBlob parent;
  for (int i = 0; i < 2; ++i) {
    auto d = pattern(2 * P, i);
    client_->sync(h, client_->append(h, d));
    parent.apply({UpdateKind::Append, 0, d});
  }
  const auto nodes = dep_->node_count();
  const auto pages = dep_->page_usage();
  auto b = client_->branch(h, 2);
  EXPECT_EQ(dep_->node_count(), nodes);
  EXPECT_EQ(dep_->page_usage(), pages);
  EXPECT_EQ(client_->get_recent(b), 2u);
  for (Version v = 0; v <= 2; ++v) EXPECT_EQ(client_->read(b, v, 0, parent.size(v)), parent.snapshot(v));

  auto child = parent.fork(2);
  auto pd = pattern(300, 10), cd = pattern(500, 11);
  client_->sync(h, client_->write(h, pd, 100));
  client_->sync(b, client_->write(b, cd, 1500));
  parent.apply({UpdateKind::Write, 100, pd});
  child.apply({UpdateKind::Write, 1500, cd});
  EXPECT_EQ(client_->read(h, 3, 0, parent.size(3)), parent.snapshot(3));
  EXPECT_EQ(client_->read(b, 3, 0, child.size(3)), child.snapshot(3));
  EXPECT_NE(parent.snapshot(3), child.snapshot(3));
  EXPECT_EQ(client_->get_recent(h), 3u);

  // A branch of a branch, opened from its id alone.
  auto bb = client_->branch(b, 3);
  auto reopened = client_->open(bb.id);
  EXPECT_EQ(client_->read(reopened, 3, 0, child.size(3)), child.snapshot(3));
  EXPECT_EQ(client_->read(reopened, 1, 0, parent.size(1)), parent.snapshot(1));
}

TEST_P(ClientTest, SlowProvidersOverlap) {
  DeploymentOptions o;
  o.data_providers = 8;
  o.provider_delay = 40ms;
  start(o);
  const std::uint64_t P = 4096;
  auto h = client_->create(P);
  auto t0 = std::chrono::steady_clock::now();
  client_->sync(h, client_->write(h, pattern(P, 1), 0));
  auto one = std::chrono::steady_clock::now() - t0;
  t0 = std::chrono::steady_clock::now();
  client_->sync(h, client_->write(h, pattern(8 * P, 2), 0));
  auto eight = std::chrono::steady_clock::now() - t0;
  EXPECT_LT(eight, 2 * one);

  t0 = std::chrono::steady_clock::now();
  client_->read(h, 2, 0, P);
  one = std::chrono::steady_clock::now() - t0;
  t0 = std::chrono::steady_clock::now();
  client_->read(h, 2, 0, 8 * P);
  eight = std::chrono::steady_clock::now() - t0;
  EXPECT_GE(one, 40ms);
  EXPECT_LT(eight, 2 * one);
}

TEST_P(ClientTest, StoreFullSurfaces) {
  DeploymentOptions o;
  o.data_providers = 1;
  o.provider_capacity = 2048;
  start(o);
  auto h = client_->create(1024);
  client_->sync(h, client_->append(h, pattern(2048, 1)));
  EXPECT_ERRC(client_->append(h, pattern(10, 2)), Errc::StoreFull);
  EXPECT_EQ(client_->get_recent(h), 1u);
}

INSTANTIATE_TEST_SUITE_P(Transports, ClientTest, ::testing::Values(Transport::Loopback, Transport::Tcp),
                         transport_name);
