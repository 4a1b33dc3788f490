#include "vblob/bench/report.hpp"

#include <algorithm>
#include <cstdio>

namespace vblob::bench {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace

void RunReport::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : fields) {
    if (k == key) {
      v = value;
      return;
    }
  }
  fields.emplace_back(key, value);
}

void RunReport::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

void RunReport::set(const std::string& key, double value) { set(key, format_double(value)); }

std::string RunReport::get(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return {};
}

void RunReport::check(const std::string& check_name, bool passed, const std::string& detail) {
  checks.push_back({check_name, passed, detail});
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const RunReport::Check* RunReport::find_check(const std::string& check_name) const {
  for (const auto& c : checks) {
    if (c.name == check_name) return &c;
  }
  return nullptr;
}

void RunReport::write_text(std::ostream& out) const {
  out << "report=" << name << '\n';
  for (const auto& [k, v] : fields) out << k << '=' << v << '\n';
  if (!node_counts.empty()) {
    out << "node_counts=";
    for (std::size_t i = 0; i < node_counts.size(); ++i) out << (i ? "," : "") << node_counts[i];
    out << '\n';
  }
  for (const auto& [addr, pages] : provider_pages) out << "provider_pages " << addr << '=' << pages << '\n';
  for (const auto& s : samples) {
    out << "sample series=" << s.series << " x=" << format_double(s.x) << " mib_s=" << format_double(s.y) << '\n';
  }
  for (const auto& c : checks) {
    out << "check " << c.name << '=' << (c.passed ? "pass" : "fail");
    if (!c.detail.empty()) out << " detail=" << quote(c.detail);
    out << '\n';
  }
  out << "verdict=" << (passed() ? "pass" : "fail") << '\n';
}

void RunReport::write_csv(std::ostream& out) const {
  out << "series,x,mib_s\n";
  for (const auto& s : samples) out << s.series << ',' << format_double(s.x) << ',' << format_double(s.y) << '\n';
}

}  // namespace vblob::bench
