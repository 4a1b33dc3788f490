#pragma once

#include <cstdint>
#include <vector>

#include "vblob/bench/deployment.hpp"
#include "vblob/bench/report.hpp"
#include "vblob/rpc/transport.hpp"

namespace vblob::bench {

struct AppendGrowthOptions {
  std::uint64_t pages = 1024;
  std::uint64_t psize = 64 * 1024;
  /// Appends per throughput sample.
  std::size_t window = 64;
};

/// A single client appends one page at a time to a fresh blob. Records the
/// new metadata nodes of every append, the page counts at which that number
/// steps up, and windowed append throughput.
RunReport bench_append_growth(Deployment& deployment, const AppendGrowthOptions& options);

/// Append throughput (MiB/s) of the window ending at the given blob size,
/// from the median append latency of that window. 0 when not sampled.
double append_throughput_at(const RunReport& report, double blob_mib);

struct ReadConcurrencyOptions {
  std::vector<std::size_t> readers{1, 2, 4, 8, 16};
  std::uint64_t chunk = 4 << 20;
  std::uint64_t psize = 64 * 1024;
  /// Network link of each reader; disabled by default.
  rpc::LinkModel link{};
  std::size_t repetitions = 3;
};

/// Pre-populates one blob with max(readers) disjoint chunks, then for each
/// reader count runs that many clients reading their own chunk at once.
/// Fields per_reader_<n> and aggregate_<n> hold MiB/s (median over repetitions).
RunReport bench_read_concurrency(Deployment& deployment, const ReadConcurrencyOptions& options);

}  // namespace vblob::bench
