#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <thread>

#include "errc.hpp"
#include "tree_harness.hpp"
#include "tree_sim.hpp"

using namespace vblob;
using vblob::testing::TreeDiffSimulator;
using vblob::testing::TreeHarness;

namespace {

constexpr std::uint64_t P = 16;

std::set<NodePos> positions(const std::map<NodePos, TreeNode>& nodes) {
  std::set<NodePos> out;
  for (auto& [p, n] : nodes) out.insert(p);
  return out;
}

std::set<NodePos> S(std::initializer_list<std::pair<std::uint64_t, std::uint64_t>> l) {
  std::set<NodePos> out;
  for (auto [o, s] : l) out.insert(NodePos{o, s});
  return out;
}

/// Three updates: four pages, an overwrite of
/// pages 1-2, a one-page append.
void three_updates(TreeHarness& h) {
  h.update(UpdateKind::Append, std::nullopt, 4 * P);
  h.update(UpdateKind::Write, P, 2 * P);
  h.update(UpdateKind::Append, std::nullopt, P);
}

/// Structure of version v's stored nodes against the simulator: same new
/// positions, same child links, leaves pointing at their own version.
void expect_matches_sim(TreeHarness& h, const TreeDiffSimulator& sim, Version v, const std::set<NodePos>& created) {
  auto nodes = h.nodes_of(v);
  EXPECT_EQ(positions(nodes), created) << "version " << v;
  for (auto& [p, node] : nodes) {
    if (p.is_leaf()) {
      ASSERT_TRUE(node.is_leaf());
    } else {
      ASSERT_FALSE(node.is_leaf());
      auto [l, r] = sim.children(v, p);
      EXPECT_EQ(node.as_inner(), (InnerNode{l, r})) << "version " << v << " node " << to_string(p);
    }
  }
}

struct RandomUpdate {
  UpdateKind kind;
  std::uint64_t offset;
  std::uint64_t size;
};

RandomUpdate random_update(std::mt19937_64& rng, std::uint64_t cur_size, bool aligned, std::uint64_t max_pages) {
  RandomUpdate u{};
  const bool append = cur_size == 0 || rng() % 3 == 0;
  u.kind = append ? UpdateKind::Append : UpdateKind::Write;
  if (aligned) {
    u.size = (1 + rng() % max_pages) * P;
    u.offset = append ? cur_size : (rng() % (cur_size / P + 1)) * P;
  } else {
    u.size = 1 + rng() % (max_pages * P);
    u.offset = append ? cur_size : rng() % (cur_size + 1);
  }
  return u;
}

}  // namespace

TEST(ThreeUpdates, NodeSets) {
  TreeHarness h(P);
  three_updates(h);
  EXPECT_EQ(positions(h.nodes_of(1)), S({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {0, 2}, {2, 2}, {0, 4}}));
  EXPECT_EQ(positions(h.nodes_of(2)), S({{1, 1}, {2, 1}, {0, 2}, {2, 2}, {0, 4}}));
  EXPECT_EQ(positions(h.nodes_of(3)), S({{4, 1}, {4, 2}, {4, 4}, {0, 8}}));
  auto v3 = h.nodes_of(3);
  EXPECT_EQ(v3.at(NodePos{0, 8}).as_inner(), (InnerNode{2, 3}));
  EXPECT_EQ(v3.at(NodePos{4, 4}).as_inner(), (InnerNode{3, kNoVersion}));
  EXPECT_EQ(v3.at(NodePos{4, 2}).as_inner(), (InnerNode{3, kNoVersion}));
  auto v2 = h.nodes_of(2);
  EXPECT_EQ(v2.at(NodePos{0, 2}).as_inner(), (InnerNode{1, 2}));
  EXPECT_EQ(v2.at(NodePos{2, 2}).as_inner(), (InnerNode{2, 1}));
}

TEST(ThreeUpdates, ReadVersion2SharesOuterPages) {
  TreeHarness h(P);
  three_updates(h);
  auto ext = h.read(2, ByteRange{0, 4 * P});
  ASSERT_EQ(ext.size(), 4u);
  const Version expect[] = {1, 2, 2, 1};
  for (std::uint64_t i = 0; i < 4; ++i) {
    EXPECT_EQ(ext[i].pid, TreeHarness::pid_for(expect[i], i));
    EXPECT_EQ(ext[i].blob_offset, i * P);
    EXPECT_EQ(ext[i].len, P);
  }
  EXPECT_EQ(h.read(1, ByteRange{2 * P, P}).size(), 1u);
  EXPECT_TRUE(h.read(3, ByteRange{P, 0}).empty());
}

TEST(ThreeUpdates, ConcurrentBuildIsByteIdentical) {
  TreeHarness seq(P);
  three_updates(seq);

  TreeHarness con(P);
  con.update(UpdateKind::Append, std::nullopt, 4 * P);
  auto t2 = con.assign(UpdateKind::Write, P, 2 * P);
  auto t3 = con.assign(UpdateKind::Append, std::nullopt, P);
  ASSERT_EQ(t3.concurrent.size(), 1u);
  // v3 is built and notified first.
  std::thread b3([&] {
    con.build(t3, P);
    con.publish(3);
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(5));
  con.build(t2, 2 * P);
  con.publish(2);
  b3.join();
  EXPECT_EQ(con.all_nodes(), seq.all_nodes());
}

TEST(Border, OverwriteInsideFourPages) {
  TreeHarness h(P);
  h.update(UpdateKind::Append, std::nullopt, 4 * P);
  auto t = h.assign(UpdateKind::Write, P, 2 * P);
  auto ctx = h.ctx();
  EXPECT_EQ(border_versions(ctx, PageSpan{1, 2}, 4, t), (BorderMap{{NodePos{0, 1}, 1}, {NodePos{3, 1}, 1}}));
}

TEST(Border, AppendGrowsRoot) {
  TreeHarness h(P);
  h.update(UpdateKind::Append, std::nullopt, 4 * P);
  h.update(UpdateKind::Write, P, 2 * P);
  auto t = h.assign(UpdateKind::Append, std::nullopt, P);
  auto ctx = h.ctx();
  EXPECT_EQ(border_versions(ctx, PageSpan{4, 1}, 8, t),
            (BorderMap{{NodePos{0, 4}, 2}, {NodePos{5, 1}, kNoVersion}, {NodePos{6, 2}, kNoVersion}}));
}

TEST(Border, ConcurrentOverlay) {
  TreeHarness h(P);
  h.update(UpdateKind::Append, std::nullopt, 4 * P);
  auto t2 = h.assign(UpdateKind::Write, P, 2 * P);
  auto t3 = h.assign(UpdateKind::Write, 2 * P, P);
  EXPECT_EQ(t3.vp, 1u);
  auto ctx = h.ctx();
  EXPECT_EQ(border_versions(ctx, PageSpan{2, 1}, 4, t3), (BorderMap{{NodePos{0, 2}, 2}, {NodePos{3, 1}, 1}}));

  // Same links as the sequential replay.
  h.build(t3, P);
  h.build(t2, 2 * P);
  h.publish(2);
  h.publish(3);
  TreeHarness s(P);
  s.update(UpdateKind::Append, std::nullopt, 4 * P);
  s.update(UpdateKind::Write, P, 2 * P);
  s.update(UpdateKind::Write, 2 * P, P);
  EXPECT_EQ(h.all_nodes(), s.all_nodes());
}

TEST(Border, SkippingOverlayDiverges) {
  TreeHarness h(P);
  h.update(UpdateKind::Append, std::nullopt, 4 * P);
  auto t2 = h.assign(UpdateKind::Write, P, 2 * P);
  auto t3 = h.assign(UpdateKind::Write, 2 * P, P);
  auto ctx = h.ctx(true);
  EXPECT_EQ(border_versions(ctx, PageSpan{2, 1}, 4, t3).at(NodePos{0, 2}), 1u);
  (void)t2;
}

TEST(Border, FullCoverIsEmpty) {
  TreeHarness h(P);
  h.update(UpdateKind::Append, std::nullopt, 3 * P);
  auto t = h.assign(UpdateKind::Write, 0, 4 * P);
  auto ctx = h.ctx();
  EXPECT_TRUE(border_versions(ctx, PageSpan{0, 4}, 4, t).empty());
}

TEST(BuildMeta, NodeCountsPerAppend) {
  TreeHarness h(P);
  TreeDiffSimulator sim(P);
  std::vector<std::size_t> counts;
  for (int i = 0; i < 5; ++i) {
    auto t = h.assign(UpdateKind::Append, std::nullopt, P);
    counts.push_back(h.build(t, P).nodes_written());
    h.publish(t.vw);
    EXPECT_EQ(sim.apply(ByteRange{t.effective_offset, P}).size(), counts.back());
  }
  EXPECT_EQ(counts, (std::vector<std::size_t>{1, 2, 3, 3, 4}));
}

TEST(BuildMeta, NodeCountFormula) {
  // n + sum over levels of positions intersecting the update, for aligned
  // updates inside a fixed root.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    TreeHarness h(P);
    h.update(UpdateKind::Append, std::nullopt, 32 * P);
    const std::uint64_t first = rng() % 32;
    const std::uint64_t n = 1 + rng() % (32 - first);
    auto t = h.assign(UpdateKind::Write, first * P, n * P);
    std::size_t expect = n;
    for (std::uint64_t size = 2; size <= 32; size *= 2) expect += (first + n - 1) / size - first / size + 1;
    EXPECT_EQ(h.build(t, n * P).nodes_written(), expect);
  }
}

class RandomHistory : public ::testing::TestWithParam<std::tuple<std::uint64_t, bool>> {};

TEST_P(RandomHistory, MatchesSimulatorAndLastWriter) {
  auto [seed, aligned] = GetParam();
  std::mt19937_64 rng(seed);
  TreeHarness h(P);
  TreeDiffSimulator sim(P);
  std::vector<std::vector<Version>> byte_writer{{}};  // per version, writer of every byte
  for (int i = 0; i < 60; ++i) {
    auto u = random_update(rng, sim.size(sim.latest()), aligned, 6);
    auto before = h.all_nodes();
    auto t = h.assign(u.kind, u.kind == UpdateKind::Write ? std::optional(u.offset) : std::nullopt, u.size);
    ASSERT_EQ(t.effective_offset, u.offset);
    auto built = h.build(t, u.size);
    h.publish(t.vw);
    auto created = sim.apply(ByteRange{u.offset, u.size});
    EXPECT_EQ(built.nodes_written(), created.size());
    expect_matches_sim(h, sim, t.vw, created);
    // Nodes of earlier versions are untouched.
    auto after = h.all_nodes();
    for (auto& [k, bytes] : before) EXPECT_EQ(after.at(k), bytes);

    auto w = byte_writer.back();
    w.resize(std::max<std::uint64_t>(w.size(), u.offset + u.size));
    std::fill(w.begin() + u.offset, w.begin() + u.offset + u.size, t.vw);
    byte_writer.push_back(std::move(w));
  }

  for (int q = 0; q < 200; ++q) {
    const Version v = rng() % (sim.latest() + 1);
    const std::uint64_t size_v = sim.size(v);
    ASSERT_EQ(h.size(v), size_v);
    std::uint64_t off = size_v ? rng() % size_v : 0;
    std::uint64_t len = size_v - off ? 1 + rng() % (size_v - off) : 0;
    if (aligned && size_v) {
      off = off / P * P;
      len = std::min(size_v - off, (len + P - 1) / P * P);
    }
    ReadStats stats;
    auto ext = h.read(v, ByteRange{off, len}, &stats);
    std::uint64_t pos = off;
    for (auto& e : ext) {
      ASSERT_EQ(e.blob_offset, pos);
      ASSERT_GE(e.len, 1u);
      for (std::uint64_t x = e.blob_offset; x < e.blob_offset + e.len; ++x) {
        ASSERT_EQ(e.pid, TreeHarness::pid_for(byte_writer[v][x], x / P)) << "v=" << v << " byte " << x;
      }
      pos += e.len;
    }
    EXPECT_EQ(pos, off + len);
    if (len) {
      const std::uint64_t n = (off + len - 1) / P - off / P + 1;
      const std::uint64_t root = root_cover((size_v + P - 1) / P);
      EXPECT_LE(stats.node_fetches, 4 * (n + std::bit_width(root) - 1));
    }
    if (aligned && len) {
      auto writers = sim.last_writers(v);
      for (auto& e : ext) EXPECT_EQ(e.pid.hi, writers[e.page]);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomHistory,
                         ::testing::Combine(::testing::Values(1, 2, 3, 4), ::testing::Bool()));

TEST(BuildMeta, ConcurrentBuildEquivalence) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    std::mt19937_64 rng(seed);
    const bool aligned = seed % 2 == 0;
    std::vector<RandomUpdate> updates;
    std::uint64_t size = 0;
    for (int i = 0; i < 10; ++i) {
      updates.push_back(random_update(rng, size, aligned, 5));
      size = std::max(size, updates.back().offset + updates.back().size);
    }
    const std::size_t published_first = rng() % 4;

    TreeHarness seq(P);
    for (auto& u : updates) {
      seq.update(u.kind, u.kind == UpdateKind::Write ? std::optional(u.offset) : std::nullopt, u.size);
    }

    TreeHarness con(P);
    std::vector<WriteTicket> tickets;
    for (std::size_t i = 0; i < updates.size(); ++i) {
      auto& u = updates[i];
      tickets.push_back(con.assign(u.kind, u.kind == UpdateKind::Write ? std::optional(u.offset) : std::nullopt, u.size));
      if (i < published_first) {
        con.build(tickets.back(), u.size);
        con.publish(tickets.back().vw);
      }
    }
    std::vector<std::size_t> order;
    for (std::size_t i = published_first; i < updates.size(); ++i) order.push_back(i);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::thread> builders;
    for (auto i : order) {
      const auto delay = std::chrono::microseconds(rng() % 2000);
      builders.emplace_back([&, i, delay] {
        std::this_thread::sleep_for(delay);
        con.build(tickets[i], updates[i].size);
        con.publish(tickets[i].vw);
      });
    }
    for (auto& b : builders) b.join();
    EXPECT_EQ(con.all_nodes(), seq.all_nodes()) << "seed " << seed;
  }
}

TEST(BuildMeta, FreeRunningWritersMatchReplay) {
  // Writers assign, build and publish without any coordination; the result
  // must equal a sequential build of the same updates in version order.
  TreeHarness con(P);
  con.update(UpdateKind::Append, std::nullopt, 64 * P);
  std::mutex mu;
  std::map<Version, RandomUpdate> by_version;
  std::vector<std::thread> writers;
  for (int w = 0; w < 6; ++w) {
    writers.emplace_back([&, w] {
      std::mt19937_64 rng(100 + w);
      for (int i = 0; i < 15; ++i) {
        RandomUpdate u{};
        u.kind = rng() % 3 == 0 ? UpdateKind::Append : UpdateKind::Write;
        u.size = 1 + rng() % (4 * P);
        u.offset = rng() % (64 * P);
        auto t = con.assign(u.kind, u.kind == UpdateKind::Write ? std::optional(u.offset) : std::nullopt, u.size);
        u.offset = t.effective_offset;
        {
          std::lock_guard lock(mu);
          by_version[t.vw] = u;
        }
        con.build(t, u.size);
        con.publish(t.vw);
      }
    });
  }
  for (auto& w : writers) w.join();

  TreeHarness seq(P);
  seq.update(UpdateKind::Append, std::nullopt, 64 * P);
  for (auto& [v, u] : by_version) {
    ASSERT_EQ(seq.update(u.kind, u.kind == UpdateKind::Write ? std::optional(u.offset) : std::nullopt, u.size), v);
  }
  EXPECT_EQ(con.all_nodes(), seq.all_nodes());
}

TEST(BuildMeta, ReadTilesWholeBlob) {
  TreeHarness h(P);
  h.update(UpdateKind::Append, std::nullopt, 3 * P + 5);
  h.update(UpdateKind::Write, P + 3, 9);
  h.update(UpdateKind::Append, std::nullopt, 40);
  for (Version v = 0; v <= 3; ++v) {
    auto ext = h.read(v, ByteRange{0, h.size(v)});
    std::uint64_t pos = 0;
    for (auto& e : ext) {
      EXPECT_EQ(e.blob_offset, pos);
      pos += e.len;
    }
    EXPECT_EQ(pos, h.size(v));
  }
}

TEST(ReadMeta, EmptyBlob) {
  TreeHarness h(P);
  EXPECT_TRUE(read_meta(h.ctx(), 0, ByteRange{0, 0}, 0).empty());
}

TEST(Overlay, MiddleOfFullPage) {
  const PageId p0{1, 0}, pn{2, 0};
  std::vector<Fragment> prev{Fragment{0, 1024, p0, "a", 0}};
  auto out = overlay_fragments(prev, {Fragment{100, 200, pn, "b", 0}});
  EXPECT_EQ(out, (std::vector<Fragment>{Fragment{0, 100, p0, "a", 0}, Fragment{100, 200, pn, "b", 0},
                                        Fragment{300, 724, p0, "a", 300}}));
}

TEST(Overlay, NoPredecessor) {
  TreeHarness h(512);
  auto leaf = materialize_boundary_leaf(h.ctx(), 0, {Fragment{0, 512, PageId{1, 1}, "p", 0}}, kNoVersion);
  EXPECT_EQ(leaf.as_leaf().fragments.size(), 1u);
}

TEST(Overlay, ComposesLikeBytes) {
  constexpr std::uint32_t kPage = 256;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Fragment> frags;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> bytes(kPage, {0, 0});  // (pid tag, source byte)
    std::uint32_t covered = 0;
    for (std::uint64_t u = 1; u <= 1 + rng() % 5; ++u) {
      std::uint32_t off = rng() % (covered + 1 < kPage ? covered + 1 : kPage);
      off = std::min(off, kPage - 1);
      const std::uint32_t len = 1 + rng() % (kPage - off);
      const std::uint32_t src = rng() % 50;
      frags = overlay_fragments(frags, {Fragment{off, len, PageId{u, 0}, "p", src}});
      for (std::uint32_t x = off; x < off + len; ++x) bytes[x] = {u, src + x - off};
      covered = std::max(covered, off + len);
    }
    std::uint32_t pos = 0;
    for (auto& f : frags) {
      ASSERT_EQ(f.page_off, pos);
      for (std::uint32_t x = 0; x < f.len; ++x) {
        ASSERT_EQ(bytes[f.page_off + x], std::make_pair(f.pid.hi, f.src_off + x));
      }
      pos += f.len;
    }
    EXPECT_EQ(pos, covered);
  }
}
