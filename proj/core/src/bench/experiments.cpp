#include "vblob/bench/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <chrono>
#include <latch>
#include <sstream>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "vblob/bench/suite.hpp"
#include "vblob/client.hpp"
#include "vblob/error.hpp"

namespace vblob::bench {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kMiB = 1024.0 * 1024.0;

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::string join(const std::vector<std::uint64_t>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

/// Hands freed heap pages back to the system. Otherwise the first windows of
/// a run reuse memory released by an earlier run while later windows fault
/// in fresh pages, which skews any early/late comparison.
void release_free_memory() {
#if defined(__GLIBC__)
  malloc_trim(0);
#endif
}

}  // namespace

RunReport bench_append_growth(Deployment& deployment, const AppendGrowthOptions& options) {
  if (options.pages == 0 || options.window == 0) raise(Errc::InvalidArgument, "pages and window must be positive");
  release_free_memory();
  Client client(deployment.cluster());
  auto h = client.create(options.psize);
  const Bytes page = make_payload(options.psize, options.psize);

  RunReport report;
  report.name = "append-growth";
  report.set("pages", options.pages);
  report.set("psize", options.psize);
  report.set("window", static_cast<std::uint64_t>(options.window));

  std::vector<double> latencies;
  latencies.reserve(options.pages);
  std::vector<std::uint64_t> steps;
  for (std::uint64_t i = 0; i < options.pages; ++i) {
    const auto before = deployment.node_count();
    const auto t0 = Clock::now();
    client.append(h, page);
    latencies.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    report.node_counts.push_back(deployment.node_count() - before);
    if (i > 0 && report.node_counts[i] > report.node_counts[i - 1]) steps.push_back(i);
  }

  for (std::size_t w = 0; w + options.window <= latencies.size(); w += options.window) {
    std::vector<double> window(latencies.begin() + static_cast<std::ptrdiff_t>(w),
                               latencies.begin() + static_cast<std::ptrdiff_t>(w + options.window));
    const double blob_mib = static_cast<double>((w + options.window) * options.psize) / kMiB;
    report.samples.push_back({"append_median", blob_mib, static_cast<double>(options.psize) / kMiB / median(window)});
    double total = 0;
    for (double t : window) total += t;
    report.samples.push_back(
        {"append_mean", blob_mib, static_cast<double>(options.window * options.psize) / kMiB / total});
  }

  std::vector<std::uint64_t> expected;
  for (std::uint64_t p = 1; p < options.pages; p *= 2) expected.push_back(p);
  report.set("step_pages", join(steps));
  report.set("total_nodes", static_cast<std::uint64_t>(deployment.node_count()));
  report.check("steps_at_powers_of_two", steps == expected, "steps at page counts " + join(steps));
  return report;
}

double append_throughput_at(const RunReport& report, double blob_mib) {
  for (const auto& s : report.samples) {
    if (s.series == "append_median" && std::abs(s.x - blob_mib) < 1e-9) return s.y;
  }
  return 0;
}

RunReport bench_read_concurrency(Deployment& deployment, const ReadConcurrencyOptions& options) {
  if (options.readers.empty() || options.chunk == 0) raise(Errc::InvalidArgument, "need readers and a chunk size");
  const std::size_t max_readers = *std::max_element(options.readers.begin(), options.readers.end());
  release_free_memory();

  Client writer(deployment.cluster());
  auto h = writer.create(options.psize);
  std::vector<Bytes> chunks;
  for (std::size_t r = 0; r < max_readers; ++r) {
    chunks.push_back(make_payload(1000 + r, options.chunk));
    writer.append(h, chunks.back());
  }
  const Version v = writer.get_recent(h);
  writer.sync(h, v);

  RunReport report;
  report.name = "read-concurrency";
  report.set("chunk", options.chunk);
  report.set("psize", options.psize);
  report.set("link_mb_s", options.link.bytes_per_second / 1e6);
  report.set("link_latency_us", static_cast<std::uint64_t>(options.link.latency.count()));

  bool data_ok = true;
  for (std::size_t n : options.readers) {
    std::vector<std::unique_ptr<Client>> clients;
    for (std::size_t r = 0; r < n; ++r) {
      ClientOptions co;
      co.link = options.link;
      clients.push_back(std::make_unique<Client>(deployment.cluster(), co));
      clients.back()->get_size(h, v);
    }
    std::vector<double> per_reader_runs, aggregate_runs;
    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
      std::vector<double> elapsed(n);
      std::vector<Clock::time_point> start(n), end(n);
      std::vector<Bytes> buffers(n, Bytes(options.chunk));
      std::latch go(static_cast<std::ptrdiff_t>(n));
      {
        std::vector<std::jthread> threads;
        for (std::size_t r = 0; r < n; ++r) {
          threads.emplace_back([&, r] {
            go.arrive_and_wait();
            start[r] = Clock::now();
            clients[r]->read(h, v, buffers[r], r * options.chunk);
            end[r] = Clock::now();
          });
        }
      }
      double sum = 0;
      for (std::size_t r = 0; r < n; ++r) {
        sum += static_cast<double>(options.chunk) / kMiB / std::chrono::duration<double>(end[r] - start[r]).count();
        data_ok = data_ok && buffers[r] == chunks[r];
      }
      const auto wall = *std::max_element(end.begin(), end.end()) - *std::min_element(start.begin(), start.end());
      per_reader_runs.push_back(sum / static_cast<double>(n));
      aggregate_runs.push_back(static_cast<double>(n * options.chunk) / kMiB /
                               std::chrono::duration<double>(wall).count());
    }
    const double per_reader = median(per_reader_runs);
    const double aggregate = median(aggregate_runs);
    report.set("per_reader_" + std::to_string(n), per_reader);
    report.set("aggregate_" + std::to_string(n), aggregate);
    report.samples.push_back({"per_reader", static_cast<double>(n), per_reader});
    report.samples.push_back({"aggregate", static_cast<double>(n), aggregate});
  }
  report.check("data", data_ok, "every reader got its chunk's bytes");
  return report;
}

}  // namespace vblob::bench
