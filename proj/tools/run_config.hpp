#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace granular::cli {

/// Line-oriented "key = value" parameters. Every getter records the value it
/// resolved (default included) so the effective configuration can be hashed.
class RunConfig {
 public:
  static RunConfig parse(std::string_view text, const std::string& origin);
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback);
  double real(const std::string& key, double fallback);
  std::size_t count(const std::string& key, std::size_t fallback);
  std::uint64_t integer(const std::string& key, std::uint64_t fallback);
  bool flag(const std::string& key, bool fallback);
  /// Keys "prefix.name"; returns name -> value and marks them used.
  std::map<std::string, std::string> with_prefix(const std::string& prefix);

  /// Throws a configuration error naming keys no getter asked for.
  void reject_unused() const;
  /// Sorted "key = value" lines of every resolved parameter.
  std::string canonical() const;

 private:
  std::optional<std::string> raw(const std::string& key);
  std::string where(const std::string& key) const;
  void record(const std::string& key, const std::string& value) { resolved_[key] = value; }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origins_;
  std::set<std::string> used_;
  std::map<std::string, std::string> resolved_;
};

}  // namespace granular::cli
