#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace vblob::bench {

/// Result of one harness run. Text output is one `key=value` record per
/// line; everything except throughput samples is stable for a fixed seed.
struct RunReport {
  struct Sample {
    std::string series;
    double x = 0;
    double y = 0;
  };
  struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
  };

  std::string name;
  std::vector<std::pair<std::string, std::string>> fields;
  /// Throughput samples in MiB/s.
  std::vector<Sample> samples;
  /// New metadata nodes per update, in update order.
  std::vector<std::uint64_t> node_counts;
  std::map<std::string, std::uint64_t> provider_pages;
  std::vector<Check> checks;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, double value);
  /// Empty string when the key was never set.
  std::string get(const std::string& key) const;

  void check(const std::string& check_name, bool passed, const std::string& detail = {});
  bool passed() const;
  const Check* find_check(const std::string& check_name) const;

  void write_text(std::ostream& out) const;
  /// series,x,y rows of the samples.
  void write_csv(std::ostream& out) const;
};

}  // namespace vblob::bench
