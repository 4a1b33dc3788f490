#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "vblob/error.hpp"
#include "errc.hpp"
#include "vblob/metastore.hpp"

using namespace vblob;
using namespace std::chrono_literals;
using vblob::testing::code_of;

namespace {

NodeKey key(Version v, NodePos p, BlobId b = BlobId{1, 2}) { return NodeKey{b, v, p}; }

TreeNode leaf_node(std::uint64_t tag) { return TreeNode::leaf({Fragment{0, 1024, PageId{tag, tag}, "mem://p0", 0}}); }

}  // namespace

TEST(NodeEncoding, InnerCanonicalBytes) {
  auto bytes = TreeNode::inner(2, kNoVersion).encode();
  Bytes expect{0, 0, 0, 0, 0, 0, 0, 0, 2, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff};
  EXPECT_EQ(bytes, expect);
  EXPECT_EQ(TreeNode::decode(bytes), TreeNode::inner(2, kNoVersion));
}

TEST(NodeEncoding, LeafCanonicalBytes) {
  auto node = TreeNode::leaf({Fragment{16, 32, PageId{0x0102, 0x0304}, "ab", 7}});
  Bytes expect{1, 0, 1,                               // tag, count
               0, 0, 0, 16, 0, 0, 0, 32,              // page_off, len
               0, 0, 0, 0, 0, 0, 1, 2, 0, 0, 0, 0, 0, 0, 3, 4,  // pid
               0, 2, 'a', 'b',                        // provider
               0, 0, 0, 7};                           // src_off
  EXPECT_EQ(node.encode(), expect);
  EXPECT_EQ(TreeNode::decode(expect), node);
}

TEST(NodeEncoding, KeyEncoding) {
  NodeKey k{BlobId{1, 2}, 3, NodePos{4, 4}};
  auto bytes = k.encode();
  ASSERT_EQ(bytes.size(), NodeKey::kEncodedSize);
  EXPECT_EQ(NodeKey::decode(bytes), k);
  EXPECT_EQ(bytes[7], 1);
  EXPECT_EQ(bytes[39], 4);
}

TEST(NodeEncoding, MalformedInput) {
  auto malformed = [](Bytes b) { return code_of([&] { TreeNode::decode(b); }); };
  EXPECT_EQ(malformed({}), Errc::Malformed);
  EXPECT_EQ(malformed({2}), Errc::Malformed);
  EXPECT_EQ(malformed({0, 0, 0}), Errc::Malformed);
  auto good = leaf_node(1).encode();
  good.push_back(0);
  EXPECT_EQ(malformed(good), Errc::Malformed);
  good.resize(good.size() - 3);
  EXPECT_EQ(malformed(good), Errc::Malformed);
}

TEST(NodeValidate, Invariants) {
  EXPECT_NO_THROW(validate(TreeNode::inner(1, kNoVersion)));
  EXPECT_EQ(code_of([] { validate(TreeNode::inner(kNoVersion, kNoVersion)); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { validate(TreeNode::leaf({})); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { validate(TreeNode::leaf({Fragment{0, 0, PageId{1, 1}, "p", 0}})); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] {
              validate(TreeNode::leaf({Fragment{0, 100, PageId{1, 1}, "p", 0}, Fragment{50, 10, PageId{1, 2}, "p", 0}}));
            }),
            Errc::InvalidArgument);
  EXPECT_EQ(code_of([] {
              validate(TreeNode::leaf({Fragment{100, 10, PageId{1, 1}, "p", 0}, Fragment{0, 10, PageId{1, 2}, "p", 0}}));
            }),
            Errc::InvalidArgument);
}

TEST(MetaStore, RoundTripAndIdempotency) {
  MetaStore s;
  auto k = key(1, {0, 1});
  s.put_node(k, leaf_node(1));
  EXPECT_EQ(s.get_node(k), leaf_node(1));
  EXPECT_NO_THROW(s.put_node(k, leaf_node(1)));
  EXPECT_EQ(code_of([&] { s.put_node(k, leaf_node(2)); }), Errc::Conflict);
  EXPECT_EQ(s.get_node(k), leaf_node(1));
  EXPECT_EQ(s.node_count(), 1u);
}

TEST(MetaStore, AbsentKey) {
  MetaStore s;
  EXPECT_EQ(code_of([&] { s.get_node(key(1, {0, 1})); }), Errc::NotFound);
  EXPECT_FALSE(s.find_node(key(1, {0, 1})).has_value());
}

TEST(MetaStore, PutEncodedRejectsGarbage) {
  MetaStore s;
  EXPECT_EQ(code_of([&] { s.put_encoded(key(1, {0, 1}), Bytes{9, 9}); }), Errc::Malformed);
  EXPECT_EQ(code_of([&] { s.put_encoded(key(1, {0, 2}), TreeNode::inner(kNoVersion, kNoVersion).encode()); }),
            Errc::InvalidArgument);
  EXPECT_EQ(s.node_count(), 0u);
}

TEST(MetaStore, ConcurrentPutsOneWinner) {
  MetaStore s;
  auto k = key(5, {0, 1});
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      try {
        s.put_node(k, leaf_node(t));
        ++ok;
      } catch (const Error& e) {
        if (e.code() == Errc::Conflict) ++conflict;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), 7);
}

TEST(GetNodeWait, AlreadyPresent) {
  MetaStore s;
  s.put_node(key(1, {0, 1}), leaf_node(1));
  auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(s.get_node_wait(key(1, {0, 1}), WaitPolicy{1s, 5ms}), leaf_node(1));
  EXPECT_LT(std::chrono::steady_clock::now() - start, 50ms);
}

TEST(GetNodeWait, StoredLater) {
  MetaStore s;
  std::thread writer([&] {
    std::this_thread::sleep_for(10ms);
    s.put_node(key(1, {0, 1}), leaf_node(3));
  });
  EXPECT_EQ(s.get_node_wait(key(1, {0, 1}), WaitPolicy{1s, 1ms}), leaf_node(3));
  writer.join();
}

TEST(GetNodeWait, Timeout) {
  MetaStore s;
  auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { s.get_node_wait(key(1, {0, 1}), WaitPolicy{50ms, 5ms}); }), Errc::Timeout);
  auto took = std::chrono::steady_clock::now() - start;
  EXPECT_GE(took, 50ms);
  EXPECT_LT(took, 1s);
}

TEST(Locate, DeterministicAndSingleStore) {
  auto k = key(9, {4, 4}, BlobId::random());
  EXPECT_EQ(locate(k, 7), locate(k, 7));
  EXPECT_EQ(key_hash(k), key_hash(k));
  EXPECT_EQ(locate(k, 1), 0u);
}

TEST(Locate, BalanceOverSevenStores) {
  std::mt19937_64 rng(11);
  std::vector<int> load(7);
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    NodeKey k{BlobId{rng(), rng()}, rng() % 1000, NodePos{rng() % 1024, 1}};
    ++load[locate(k, 7)];
  }
  for (int l : load) {
    EXPECT_GE(l, n / 7.0 * 0.8);
    EXPECT_LE(l, n / 7.0 * 1.2);
  }
}

TEST(Locate, MaxMinRatio) {
  // Realistic keys: one blob, consecutive versions and tree positions.
  auto blob = BlobId::random();
  std::vector<int> load(4);
  int n = 0;
  for (Version v = 1; n < 100'000; ++v) {
    for (std::uint64_t size = 1; size <= 64 && n < 100'000; size *= 2, ++n) {
      ++load[locate(NodeKey{blob, v, NodePos{(v * size) % 1024 / size * size, size}}, 4)];
    }
  }
  auto [lo, hi] = std::minmax_element(load.begin(), load.end());
  EXPECT_LT(static_cast<double>(*hi) / *lo, 1.5);
}

TEST(Dht, RoutesByLocate) {
  std::vector<std::shared_ptr<MetaStore>> stores;
  std::vector<std::shared_ptr<NodeStore>> shards;
  for (int i = 0; i < 3; ++i) {
    stores.push_back(std::make_shared<MetaStore>());
    shards.push_back(stores.back());
  }
  DhtNodeStore dht(shards);
  auto blob = BlobId::random();
  for (Version v = 1; v <= 30; ++v) {
    auto k = key(v, {0, 1}, blob);
    dht.put_node(k, leaf_node(v));
    EXPECT_TRUE(stores[locate(k, 3)]->find_node(k).has_value());
    EXPECT_EQ(dht.get_node(k), leaf_node(v));
  }
  EXPECT_EQ(stores[0]->node_count() + stores[1]->node_count() + stores[2]->node_count(), 30u);
  EXPECT_EQ(code_of([] { DhtNodeStore empty({}); }), Errc::InvalidArgument);
}
