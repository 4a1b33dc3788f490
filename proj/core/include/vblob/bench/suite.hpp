#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "vblob/bench/deployment.hpp"
#include "vblob/bench/report.hpp"
#include "vblob/client.hpp"

namespace vblob::bench {

struct SuiteOptions {
  std::uint64_t seed = 1;
  /// Total operations, split evenly over all actors.
  std::size_t ops = 1000;
  std::size_t writers = 8;
  std::size_t readers = 8;
  std::uint64_t max_blob_size = 1 << 20;
  /// One root blob is created per entry.
  std::vector<std::uint64_t> psizes{1024, 4096};
  /// Branches forced into the plan; more may happen at random.
  std::size_t min_branches = 2;
  std::size_t max_blobs = 8;
  /// Update length bound, in pages of the target blob.
  std::uint64_t max_update_pages = 4;
  std::uint64_t max_read = 64 * 1024;
  /// Bound on every sync; a stuck publication fails the run instead of hanging it.
  std::chrono::milliseconds sync_timeout{60'000};
  ClientOptions client{};
};

enum class OpKind { Write, Append, Read, Branch, ReadYourWrite };

/// One step of the seeded plan. Offsets, lengths and versions are stored as
/// 32-bit fractions and resolved against the live blob when executed, so the
/// plan itself does not depend on scheduling.
struct PlannedOp {
  std::size_t actor = 0;
  std::size_t index = 0;
  bool reader = false;
  OpKind kind = OpKind::Read;
  std::uint32_t blob_pick = 0;
  std::uint32_t pos = 0;
  std::uint32_t len = 0;
  std::uint32_t version_pick = 0;
  bool aligned = false;
  /// Branches placed to meet min_branches ignore max_blobs.
  bool forced = false;
  std::uint64_t data_seed = 0;

  std::string label() const;
  std::string describe() const;
};

/// Per-actor operation lists; actors 0..writers-1 write, the rest read.
std::vector<std::vector<PlannedOp>> make_plan(const SuiteOptions& options);

/// Runs the plan with every actor on its own client, then checks all reads
/// against the oracle, the published-prefix and gap-free version properties,
/// read-your-writes and storage sharing. Errc::CheckFailed carrying the
/// failing checks and a reproducing trace; the report otherwise.
RunReport run_random_suite(Deployment& deployment, const SuiteOptions& options);

/// Deterministic content of an update.
Bytes make_payload(std::uint64_t seed, std::size_t len);

}  // namespace vblob::bench
