// Micro benchmarks for the metadata path and the in-process client.

#include <benchmark/benchmark.h>

#include "vblob/bench/deployment.hpp"
#include "vblob/client.hpp"
#include "vblob/metastore.hpp"
#include "vblob/segtree.hpp"
#include "vblob/tree_node.hpp"
#include "vblob/versioner.hpp"

using namespace vblob;

namespace {

TreeNode sample_leaf(std::size_t fragments) {
  std::vector<Fragment> frags;
  for (std::uint32_t i = 0; i < fragments; ++i) {
    frags.push_back(Fragment{i * 256, 256, PageId{1, i}, "mem://p" + std::to_string(i % 8), 0});
  }
  return TreeNode::leaf(std::move(frags));
}

void BM_EncodeInner(benchmark::State& state) {
  const auto node = TreeNode::inner(7, kNoVersion);
  for (auto _ : state) benchmark::DoNotOptimize(node.encode());
}
BENCHMARK(BM_EncodeInner);

void BM_DecodeInner(benchmark::State& state) {
  const auto bytes = TreeNode::inner(7, 3).encode();
  for (auto _ : state) benchmark::DoNotOptimize(TreeNode::decode(bytes));
}
BENCHMARK(BM_DecodeInner);

void BM_EncodeLeaf(benchmark::State& state) {
  const auto node = sample_leaf(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(node.encode());
}
BENCHMARK(BM_EncodeLeaf)->Arg(1)->Arg(4)->Arg(16);

void BM_DecodeLeaf(benchmark::State& state) {
  const auto bytes = sample_leaf(static_cast<std::size_t>(state.range(0))).encode();
  for (auto _ : state) benchmark::DoNotOptimize(TreeNode::decode(bytes));
}
BENCHMARK(BM_DecodeLeaf)->Arg(1)->Arg(4)->Arg(16);

void BM_Locate(benchmark::State& state) {
  NodeKey key{BlobId{1, 2}, 1, NodePos{0, 1}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(locate(key, 16));
    ++key.pos.offset;
  }
}
BENCHMARK(BM_Locate);

/// A blob with `pages` pages written by one update, driven straight through
/// the tree engine on a local store.
struct EngineFixture {
  static constexpr std::uint64_t kPsize = 4096;

  MetaStore store;
  VersionManager vm;
  BlobId blob = vm.create_blob(kPsize);
  Lineage lineage{blob};

  TreeContext ctx() { return TreeContext{store, lineage, kPsize, WaitPolicy{}, false}; }

  Version write_pages(std::uint64_t first, std::uint64_t count, UpdateKind kind = UpdateKind::Write) {
    auto t = vm.assign_version(blob, kind, kind == UpdateKind::Write ? std::optional(first * kPsize) : std::nullopt,
                               count * kPsize);
    std::vector<PageDescriptor> pd;
    for (std::uint64_t i = 0; i < count; ++i) {
      pd.push_back(PageDescriptor{PageId{t.vw, i}, i, "mem://p0", 0, static_cast<std::uint32_t>(kPsize), 0});
    }
    build_meta(ctx(), t, ByteRange{t.effective_offset, count * kPsize}, pd);
    vm.notify_success(blob, t.vw);
    return t.vw;
  }
};

void BM_BuildMetaOnePage(benchmark::State& state) {
  const auto pages = static_cast<std::uint64_t>(state.range(0));
  EngineFixture f;
  f.write_pages(0, pages);
  std::uint64_t i = 0;
  for (auto _ : state) f.write_pages((i++ * 7919) % pages, 1);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BuildMetaOnePage)->Arg(16)->Arg(1024)->Arg(65536);

void BM_ReadMeta(benchmark::State& state) {
  const auto pages = std::uint64_t{4096};
  const auto span = static_cast<std::uint64_t>(state.range(0));
  EngineFixture f;
  f.write_pages(0, pages);
  for (std::uint64_t i = 0; i < 256; ++i) f.write_pages((i * 7919) % pages, 1 + i % 4);
  const auto v = f.vm.get_recent(f.blob);
  const auto size = f.vm.get_size(f.blob, v);
  std::uint64_t i = 0;
  for (auto _ : state) {
    const auto first = (i++ * 104729) % (pages - span + 1);
    benchmark::DoNotOptimize(read_meta(f.ctx(), v, ByteRange{first * f.kPsize, span * f.kPsize}, size));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(span));
}
BENCHMARK(BM_ReadMeta)->Arg(1)->Arg(16)->Arg(256);

void BM_ClientAppend(benchmark::State& state) {
  const auto psize = static_cast<std::uint64_t>(state.range(0));
  bench::Deployment d;
  Client c(d.cluster());
  auto h = c.create(psize);
  const Bytes page(psize, 0x5a);
  for (auto _ : state) benchmark::DoNotOptimize(c.append(h, page));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(psize));
}
BENCHMARK(BM_ClientAppend)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond);

void BM_ClientRead(benchmark::State& state) {
  const std::uint64_t psize = 65536;
  const auto pages = static_cast<std::uint64_t>(state.range(0));
  bench::Deployment d;
  Client c(d.cluster());
  auto h = c.create(psize);
  c.append(h, Bytes(pages * psize, 0x33));
  Bytes out(pages * psize);
  for (auto _ : state) c.read(h, 1, out, 0);
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}
BENCHMARK(BM_ClientRead)->Arg(1)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
