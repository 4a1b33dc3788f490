#include "vblob/bench/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string_view>
#include <thread>

#include "vblob/bench/oracle.hpp"
#include "vblob/error.hpp"

namespace vblob::bench {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// x / 2^32 scaled to [0, n).
std::uint64_t scale(std::uint32_t x, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * n) >> 32);
}

std::size_t digest(std::span<const std::uint8_t> bytes) {
  return std::hash<std::string_view>{}(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

const char* kind_name(OpKind k) {
  switch (k) {
    case OpKind::Write: return "write";
    case OpKind::Append: return "append";
    case OpKind::Read: return "read";
    case OpKind::Branch: return "branch";
    case OpKind::ReadYourWrite: return "ryw";
  }
  return "?";
}

struct Slot {
  BlobHandle handle;
  std::optional<std::size_t> parent;
  Version fork = 0;

  std::mutex mu;
  /// Upper bound on the size any in-flight or finished update can produce.
  std::uint64_t reserved = 0;
  std::map<Version, OracleUpdate> updates;
  std::map<Version, std::string> origin;
};

class Registry {
 public:
  std::size_t add(std::unique_ptr<Slot> slot) {
    std::unique_lock lock(mu_);
    slots_.push_back(std::move(slot));
    return slots_.size() - 1;
  }

  std::pair<std::size_t, Slot*> pick(std::uint32_t x) const {
    std::shared_lock lock(mu_);
    auto i = scale(x, slots_.size());
    return {i, slots_[i].get()};
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return slots_.size();
  }

  Slot& at(std::size_t i) const {
    std::shared_lock lock(mu_);
    return *slots_[i];
  }

 private:
  mutable std::shared_mutex mu_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

struct ReadRecord {
  std::string label;
  std::size_t blob = 0;
  Version v = 0;
  std::uint64_t offset = 0;
  std::uint64_t len = 0;
  std::uint64_t size = 0;
  std::size_t hash = 0;
};

class SuiteRun {
 public:
  SuiteRun(Deployment& deployment, const SuiteOptions& options) : dep_(deployment), opts_(options) {}

  RunReport run();

 private:
  void actor(const std::vector<PlannedOp>& ops, std::vector<ReadRecord>& reads);
  void update(Client& client, const PlannedOp& op);
  void branch(Client& client, const PlannedOp& op);
  void read(Client& client, const PlannedOp& op, std::map<std::size_t, Version>& seen, std::vector<ReadRecord>& out);
  void fail(const std::string& check, const std::string& detail);

  std::string origin_of(std::size_t blob, Version v);
  std::string divergence_trace(Client& verifier, const std::vector<OracleBlob>& oracles, const ReadRecord& r);

  Deployment& dep_;
  const SuiteOptions& opts_;
  Registry registry_;
  std::atomic<bool> abort_{false};
  std::atomic<std::size_t> branches_{0};
  std::atomic<std::size_t> skipped_{0};
  std::mutex fail_mu_;
  std::vector<std::pair<std::string, std::string>> failures_;
};

void SuiteRun::fail(const std::string& check, const std::string& detail) {
  std::lock_guard lock(fail_mu_);
  failures_.emplace_back(check, detail);
  abort_ = true;
}

void SuiteRun::actor(const std::vector<PlannedOp>& ops, std::vector<ReadRecord>& reads) {
  Client client(dep_.cluster(), opts_.client);
  std::map<std::size_t, Version> seen;
  for (const auto& op : ops) {
    if (abort_) return;
    try {
      switch (op.kind) {
        case OpKind::Write:
        case OpKind::Append:
        case OpKind::ReadYourWrite: update(client, op); break;
        case OpKind::Branch: branch(client, op); break;
        case OpKind::Read: read(client, op, seen, reads); break;
      }
    } catch (const std::exception& e) {
      fail("operations", op.label() + " (" + op.describe() + ") raised: " + e.what());
      return;
    }
  }
}

void SuiteRun::update(Client& client, const PlannedOp& op) {
  auto [idx, slot] = registry_.pick(op.blob_pick);
  const auto& h = slot->handle;
  const std::uint64_t psize = h.psize;
  const std::uint64_t max = opts_.max_blob_size;
  const auto size = client.get_size(h, client.get_recent(h));

  std::uint64_t len = op.aligned ? (1 + scale(op.len, opts_.max_update_pages)) * psize
                                 : 1 + scale(op.len, opts_.max_update_pages * psize);
  len = std::min(len, max);
  bool append = op.kind == OpKind::Append;
  std::uint64_t offset = 0;
  {
    std::lock_guard lock(slot->mu);
    if (append && slot->reserved + len > max) {
      if (slot->reserved < max) {
        len = max - slot->reserved;
      } else {
        append = false;
      }
    }
    if (append) {
      slot->reserved += len;
    } else {
      offset = scale(op.pos, size + 1);
      if (op.aligned) offset = offset / psize * psize;
      if (offset + len > max) offset = max - len;
      slot->reserved = std::max(slot->reserved, offset + len);
    }
  }

  Bytes data = make_payload(op.data_seed, len);
  const Version v = append ? client.append(h, data) : client.write(h, data, offset);
  {
    std::lock_guard lock(slot->mu);
    slot->updates[v] = OracleUpdate{append ? UpdateKind::Append : UpdateKind::Write, offset, data};
    slot->origin[v] = op.label();
  }

  if (op.kind == OpKind::ReadYourWrite && !append) {
    client.sync(h, v, opts_.sync_timeout);
    auto got = client.read(h, v, offset, len);
    if (got != data) {
      fail("read_your_writes", op.label() + ": blob " + std::to_string(idx) + " v" + std::to_string(v) + " [" +
                                   std::to_string(offset) + ", +" + std::to_string(len) + ") differs after sync");
    }
  }
}

void SuiteRun::branch(Client& client, const PlannedOp& op) {
  if (!op.forced && registry_.size() >= opts_.max_blobs) {
    ++skipped_;
    return;
  }
  auto [idx, slot] = registry_.pick(op.blob_pick);
  const Version v = client.get_recent(slot->handle);
  auto child = std::make_unique<Slot>();
  child->handle = client.branch(slot->handle, v);
  child->parent = idx;
  child->fork = v;
  child->reserved = client.get_size(child->handle, v);
  child->origin[0] = op.label();
  registry_.add(std::move(child));
  ++branches_;
}

void SuiteRun::read(Client& client, const PlannedOp& op, std::map<std::size_t, Version>& seen,
                    std::vector<ReadRecord>& out) {
  auto [idx, slot] = registry_.pick(op.blob_pick);
  const auto& h = slot->handle;
  const Version k = client.get_recent(h);
  auto& last = seen[idx];
  if (k < last) {
    fail("published_prefix", op.label() + ": latest published version of blob " + std::to_string(idx) +
                                 " went from " + std::to_string(last) + " to " + std::to_string(k));
    return;
  }
  last = k;

  const Version v = scale(op.version_pick, k + 1);
  std::uint64_t size = 0;
  try {
    size = client.get_size(h, v);
  } catch (const Error& e) {
    if (e.code() != Errc::NotPublished) throw;
    fail("published_prefix", op.label() + ": version " + std::to_string(v) + " <= latest " + std::to_string(k) +
                                 " of blob " + std::to_string(idx) + " is not published");
    return;
  }

  ReadRecord rec{op.label(), idx, v, 0, 0, size, 0};
  if (size > 0) {
    if (scale(op.len, 10) == 0) {
      rec.len = size;
    } else {
      rec.len = 1 + scale(op.len, std::min(opts_.max_read, size));
      rec.offset = scale(op.pos, size - rec.len + 1);
    }
    auto bytes = client.read(h, v, rec.offset, rec.len);
    rec.hash = digest(bytes);
  }
  out.push_back(std::move(rec));
}

std::string SuiteRun::origin_of(std::size_t blob, Version v) {
  auto& slot = registry_.at(blob);
  if (slot.parent && v <= slot.fork) return origin_of(*slot.parent, v);
  auto it = slot.origin.find(v);
  return it == slot.origin.end() ? "?" : it->second;
}

std::string SuiteRun::divergence_trace(Client& verifier, const std::vector<OracleBlob>& oracles,
                                       const ReadRecord& r) {
  std::ostringstream out;
  auto& slot = registry_.at(r.blob);
  const auto& oracle = oracles[r.blob];
  out << "divergence in " << r.label << ": blob " << r.blob << " (psize " << slot.handle.psize;
  if (slot.parent) out << ", branch of blob " << *slot.parent << " at v" << slot.fork;
  out << ") version " << r.v << " range [" << r.offset << ", +" << r.len << ")\n";
  if (r.size != oracle.size(r.v)) {
    out << "size observed " << r.size << ", expected " << oracle.size(r.v) << '\n';
  }
  auto expected = oracle.read(r.v, r.offset, r.len);
  Bytes got;
  try {
    got = verifier.read(slot.handle, r.v, r.offset, r.len);
  } catch (const std::exception& e) {
    out << "re-read failed: " << e.what() << '\n';
    return out.str();
  }
  auto mismatch = std::mismatch(expected.begin(), expected.end(), got.begin());
  if (mismatch.first == expected.end()) {
    out << "re-read now matches the oracle; the original read returned other bytes\n";
    return out.str();
  }
  const std::uint64_t x = r.offset + static_cast<std::uint64_t>(mismatch.first - expected.begin());
  char buf[96];
  std::snprintf(buf, sizeof buf, "first differing byte at offset %llu: expected 0x%02x, got 0x%02x\n",
                static_cast<unsigned long long>(x), *mismatch.first, *mismatch.second);
  out << buf << "updates up to v" << r.v << " covering that byte:\n";
  for (Version u = 1; u <= r.v; ++u) {
    auto range = oracle.range(u);
    if (x >= range.offset && x < range.end()) {
      out << "  v" << u << " by " << origin_of(r.blob, u) << " [" << range.offset << ", +" << range.size << ")\n";
    }
  }
  out << "seed " << opts_.seed << ", writers " << opts_.writers << ", readers " << opts_.readers << ", ops "
      << opts_.ops << '\n';
  return out.str();
}

RunReport SuiteRun::run() {
  const auto t0 = std::chrono::steady_clock::now();
  auto plan = make_plan(opts_);
  std::string trace;
  for (const auto& ops : plan) {
    for (const auto& op : ops) trace += op.describe() + '\n';
  }

  {
    Client setup(dep_.cluster(), opts_.client);
    for (auto psize : opts_.psizes) {
      auto slot = std::make_unique<Slot>();
      slot->handle = setup.create(psize);
      registry_.add(std::move(slot));
    }
  }

  std::vector<std::vector<ReadRecord>> reads(plan.size());
  {
    std::vector<std::jthread> actors;
    for (std::size_t a = 0; a < plan.size(); ++a) {
      actors.emplace_back([this, &plan, &reads, a] { actor(plan[a], reads[a]); });
    }
  }

  Client verifier(dep_.cluster(), opts_.client);
  const auto n_blobs = registry_.size();
  std::vector<Version> last(n_blobs);
  for (std::size_t i = 0; i < n_blobs; ++i) {
    auto& slot = registry_.at(i);
    last[i] = dep_.versioner().last_assigned(slot.handle.id);
    try {
      verifier.sync(slot.handle, last[i], abort_ ? std::chrono::milliseconds(2'000) : opts_.sync_timeout);
    } catch (const std::exception& e) {
      fail("publication", "blob " + std::to_string(i) + " never published v" + std::to_string(last[i]) + ": " +
                              e.what());
    }
  }

  // Versions must be exactly fork+1 .. last with no holes, each backed by a
  // finished update of this run.
  std::vector<OracleBlob> oracles;
  std::uint64_t bytes_written = 0;
  std::size_t updates = 0;
  for (std::size_t i = 0; i < n_blobs; ++i) {
    auto& slot = registry_.at(i);
    oracles.push_back(slot.parent ? oracles[*slot.parent].fork(slot.fork) : OracleBlob{});
    auto& oracle = oracles.back();
    for (Version v = slot.fork + 1; v <= last[i]; ++v) {
      auto it = slot.updates.find(v);
      if (it == slot.updates.end()) {
        fail("gap_free", "blob " + std::to_string(i) + " assigned v" + std::to_string(v) +
                             " with no completed update behind it");
        break;
      }
      try {
        oracle.apply(it->second);
      } catch (const Error& e) {
        fail("oracle_equivalence", "update v" + std::to_string(v) + " of blob " + std::to_string(i) + " by " +
                                       slot.origin[v] + " rejected by the oracle: " + e.what());
        break;
      }
      bytes_written += it->second.data.size();
      ++updates;
      const auto size_v = dep_.versioner().get_size(slot.handle.id, v);
      if (size_v != oracle.size(v)) {
        fail("sizes", "blob " + std::to_string(i) + " v" + std::to_string(v) + " size " + std::to_string(size_v) +
                          ", oracle " + std::to_string(oracle.size(v)));
      }
    }
    if (slot.updates.size() != last[i] - slot.fork) {
      fail("gap_free", "blob " + std::to_string(i) + " has " + std::to_string(slot.updates.size()) +
                           " completed updates for " + std::to_string(last[i] - slot.fork) + " assigned versions");
    }
  }

  std::size_t n_reads = 0;
  std::size_t divergences = 0;
  std::string first_trace;
  for (const auto& actor_reads : reads) {
    for (const auto& r : actor_reads) {
      ++n_reads;
      const auto& oracle = oracles[r.blob];
      if (r.v > oracle.latest()) continue;
      bool ok = r.size == oracle.size(r.v);
      if (ok && r.len > 0) ok = digest(oracle.read(r.v, r.offset, r.len)) == r.hash;
      if (!ok && divergences++ == 0) first_trace = divergence_trace(verifier, oracles, r);
    }
  }
  if (divergences > 0) {
    fail("oracle_equivalence", std::to_string(divergences) + " of " + std::to_string(n_reads) +
                                   " reads diverged\n" + first_trace);
  }

  for (std::size_t i = 0; i < n_blobs && !abort_; ++i) {
    auto& slot = registry_.at(i);
    const auto& oracle = oracles[i];
    if (oracle.latest() != last[i]) continue;
    auto got = verifier.read(slot.handle, last[i], 0, oracle.size(last[i]));
    if (got != oracle.snapshot(last[i])) {
      ReadRecord r{"final", i, last[i], 0, oracle.size(last[i]), oracle.size(last[i]), 0};
      fail("final_state", divergence_trace(verifier, oracles, r));
    }
  }

  auto usage = dep_.page_usage();
  auto per_provider = dep_.provider_page_counts();
  std::uint64_t lo = UINT64_MAX, hi = 0;
  for (const auto& [_, n] : per_provider) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }

  RunReport report;
  report.name = "random-suite";
  report.set("seed", opts_.seed);
  report.set("ops", static_cast<std::uint64_t>(opts_.ops));
  report.set("writers", static_cast<std::uint64_t>(opts_.writers));
  report.set("readers", static_cast<std::uint64_t>(opts_.readers));
  report.set("transport", to_string(dep_.options().transport));
  report.set("plan_digest", static_cast<std::uint64_t>(std::hash<std::string>{}(trace)));
  report.set("blobs", static_cast<std::uint64_t>(n_blobs));
  report.set("branches", static_cast<std::uint64_t>(branches_.load()));
  report.set("updates", static_cast<std::uint64_t>(updates));
  report.set("reads", static_cast<std::uint64_t>(n_reads));
  report.set("bytes_written", bytes_written);
  report.set("stored_bytes", usage.byte_count);
  report.set("stored_pages", usage.page_count);
  report.provider_pages = per_provider;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.set("elapsed_s", secs);

  std::map<std::string, std::string> failed;
  for (const auto& [check, detail] : failures_) {
    auto& d = failed[check];
    if (d.empty()) d = detail;
  }
  auto verdict = [&](const std::string& name, bool extra_ok = true, const std::string& extra = {}) {
    auto it = failed.find(name);
    if (it != failed.end()) {
      report.check(name, false, it->second);
    } else {
      report.check(name, extra_ok, extra);
    }
  };
  verdict("operations");
  verdict("publication");
  verdict("oracle_equivalence");
  verdict("final_state");
  verdict("read_your_writes");
  verdict("published_prefix");
  verdict("gap_free");
  verdict("sizes");
  verdict("storage_sharing", abort_ || usage.byte_count == bytes_written,
          "stored " + std::to_string(usage.byte_count) + " bytes for " + std::to_string(bytes_written) + " written");
  verdict("provider_balance", per_provider.empty() || hi - lo <= 1,
          "pages per provider in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  verdict("branches", abort_ || opts_.writers == 0 || branches_ >= opts_.min_branches,
          std::to_string(branches_.load()) + " branches");

  if (!report.passed()) {
    std::ostringstream msg;
    msg << "random suite failed\n";
    report.write_text(msg);
    throw Error(Errc::CheckFailed, "CHECK_FAILED: " + msg.str());
  }
  return report;
}

}  // namespace

std::string PlannedOp::label() const { return (reader ? "r" : "w") + std::to_string(actor) + "#" + std::to_string(index); }

std::string PlannedOp::describe() const {
  std::ostringstream out;
  out << label() << ' ' << kind_name(kind) << " blob=" << blob_pick;
  switch (kind) {
    case OpKind::Write:
    case OpKind::Append:
    case OpKind::ReadYourWrite:
      out << " pos=" << pos << " len=" << len << " aligned=" << aligned << " data=" << data_seed;
      break;
    case OpKind::Read: out << " version=" << version_pick << " pos=" << pos << " len=" << len; break;
    case OpKind::Branch:
      if (forced) out << " forced";
      break;
  }
  return out.str();
}

Bytes make_payload(std::uint64_t seed, std::size_t len) {
  Bytes out(len);
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < len; i += 8) {
    state = splitmix(state);
    for (std::size_t j = 0; j < 8 && i + j < len; ++j) out[i + j] = static_cast<std::uint8_t>(state >> (8 * j));
  }
  return out;
}

std::vector<std::vector<PlannedOp>> make_plan(const SuiteOptions& options) {
  const std::size_t actors = options.writers + options.readers;
  std::vector<std::vector<PlannedOp>> plan(actors);
  if (actors == 0) return plan;
  const std::size_t per = options.ops / actors;
  const std::size_t extra = options.ops % actors;
  for (std::size_t a = 0; a < actors; ++a) {
    std::mt19937_64 rng(splitmix(options.seed * 0x100000001B3ull + a));
    const bool reader = a >= options.writers;
    const std::size_t n = per + (a < extra ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      PlannedOp op;
      op.actor = reader ? a - options.writers : a;
      op.index = i;
      op.reader = reader;
      const auto roll = rng() % 100;
      if (reader) {
        op.kind = OpKind::Read;
      } else if (roll < 45) {
        op.kind = OpKind::Write;
      } else if (roll < 78) {
        op.kind = OpKind::Append;
      } else if (roll < 90) {
        op.kind = OpKind::ReadYourWrite;
      } else if (roll < 91) {
        op.kind = OpKind::Branch;
      } else {
        op.kind = OpKind::Read;
      }
      op.blob_pick = static_cast<std::uint32_t>(rng());
      op.pos = static_cast<std::uint32_t>(rng());
      op.len = static_cast<std::uint32_t>(rng());
      op.version_pick = static_cast<std::uint32_t>(rng());
      op.aligned = (rng() & 1) != 0;
      op.data_seed = rng();
      plan[a].push_back(op);
    }
  }
  for (std::size_t b = 0; b < options.min_branches && options.writers > 0; ++b) {
    auto& ops = plan[b % options.writers];
    if (ops.empty()) continue;
    const auto at = std::min(ops.size() - 1, (b + 1) * ops.size() / (options.min_branches + 1));
    ops[at].kind = OpKind::Branch;
    ops[at].forced = true;
  }
  return plan;
}

RunReport run_random_suite(Deployment& deployment, const SuiteOptions& options) {
  SuiteRun run(deployment, options);
  return run.run();
}

}  // namespace vblob::bench
