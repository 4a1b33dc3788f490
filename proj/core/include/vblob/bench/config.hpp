#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace vblob::bench {

inline constexpr const char* kEnvPrefix = "VBLOB_";

/// key=value settings. Lines starting with '#' are comments. Any environment
/// variable VBLOB_<KEY> (key upper-cased) overrides the file.
class Config {
 public:
  /// Errc::NotFound when the file is missing, Errc::Malformed on a bad line.
  static Config load(const std::optional<std::filesystem::path>& file, const char* env_prefix = kEnvPrefix);
  static Config parse(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  /// Errc::InvalidArgument when the value is not an unsigned integer.
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Applies VBLOB_* variables from the process environment.
  void apply_env(const char* env_prefix = kEnvPrefix);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vblob::bench
