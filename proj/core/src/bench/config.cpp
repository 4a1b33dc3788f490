#include "vblob/bench/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vblob/error.hpp"

extern char** environ;

namespace vblob::bench {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      raise(Errc::Malformed, "config line " + std::to_string(lineno) + ": expected key=value");
    }
    cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::optional<std::filesystem::path>& file, const char* env_prefix) {
  Config cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) raise(Errc::NotFound, "cannot open config " + file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parse(ss.str());
  }
  cfg.apply_env(env_prefix);
  return cfg;
}

void Config::apply_env(const char* env_prefix) {
  const std::string prefix = env_prefix;
  for (char** e = environ; e && *e; ++e) {
    std::string entry = *e;
    if (entry.rfind(prefix, 0) != 0) continue;
    auto eq = entry.find('=');
    if (eq == std::string::npos || eq == prefix.size()) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    values_[key] = entry.substr(eq + 1);
  }
}

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    raise(Errc::InvalidArgument, "config key " + key + " is not an unsigned integer: " + *v);
  }
  return out;
}

}  // namespace vblob::bench
