#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "errc.hpp"
#include "vblob/allocator.hpp"

using namespace vblob;

TEST(Allocator, PermutationOfEqualProviders) {
  ProviderManager pm;
  for (auto a : {"A", "B", "C", "D"}) pm.register_provider(a);
  auto got = pm.allocate(4);
  std::set<std::string> uniq(got.begin(), got.end());
  EXPECT_EQ(uniq, (std::set<std::string>{"A", "B", "C", "D"}));
}

TEST(Allocator, SingleProviderRepeats) {
  ProviderManager pm;
  pm.register_provider("A");
  EXPECT_EQ(pm.allocate(3), (std::vector<std::string>{"A", "A", "A"}));
}

TEST(Allocator, RegisterTwiceOneEntry) {
  ProviderManager pm;
  pm.register_provider("A");
  pm.register_provider("A");
  EXPECT_EQ(pm.providers().size(), 1u);
}

TEST(Allocator, EmptyRegistry) {
  ProviderManager pm;
  EXPECT_ERRC(pm.allocate(1), Errc::NoProviders);
}

TEST(Allocator, ReportSteersToLeastLoaded) {
  ProviderManager pm;
  pm.register_provider("A");
  pm.register_provider("B");
  pm.report("A", 10);
  EXPECT_EQ(pm.allocate(1), (std::vector<std::string>{"B"}));
  EXPECT_ERRC(pm.report("Z", 1), Errc::UnknownProvider);
}

TEST(Allocator, EqualReportsRoundRobin) {
  ProviderManager pm;
  for (auto a : {"A", "B", "C"}) pm.register_provider(a);
  std::vector<std::string> seq;
  for (int i = 0; i < 6; ++i) {
    for (auto a : {"A", "B", "C"}) pm.report(a, 5);
    seq.push_back(pm.allocate(1)[0]);
  }
  EXPECT_EQ(seq, (std::vector<std::string>{"A", "B", "C", "A", "B", "C"}));
}

TEST(Allocator, BalanceOfSingleAllocations) {
  ProviderManager pm;
  const std::vector<std::string> addrs{"p0", "p1", "p2", "p3", "p4", "p5", "p6"};
  for (auto& a : addrs) pm.register_provider(a);
  std::map<std::string, int> count;
  for (int i = 0; i < 10'000; ++i) {
    auto got = pm.allocate(1);
    ASSERT_EQ(got.size(), 1u);
    ASSERT_TRUE(std::find(addrs.begin(), addrs.end(), got[0]) != addrs.end());
    ++count[got[0]];
  }
  auto [lo, hi] = std::minmax_element(count.begin(), count.end(),
                                      [](auto& a, auto& b) { return a.second < b.second; });
  EXPECT_LE(hi->second - lo->second, 1);
}

namespace {

class FirstPolicy final : public PlacementPolicy {
 public:
  std::size_t pick(std::span<const ProviderInfo>) override { return 0; }
};

}  // namespace

TEST(Allocator, PluggablePolicy) {
  ProviderManager pm(std::make_unique<FirstPolicy>());
  pm.register_provider("A");
  pm.register_provider("B");
  EXPECT_EQ(pm.allocate(3), (std::vector<std::string>{"A", "A", "A"}));
}
