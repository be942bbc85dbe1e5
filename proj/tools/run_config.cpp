#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include "granular/error.hpp"
#include "granular/format.hpp"

namespace granular::cli {

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    const std::string at = origin + ":" + std::to_string(no);
    if (eq == std::string_view::npos) throw Error(ErrorKind::configuration, at + ": expected 'key = value'");
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    if (key.empty()) throw Error(ErrorKind::configuration, at + ": empty key");
    if (c.values_.count(key)) throw Error(ErrorKind::configuration, at + ": duplicate key '" + key + "'");
    c.values_[key] = value;
    c.origins_[key] = at;
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  origins_[key] = "command line";
}

std::optional<std::string> RunConfig::raw(const std::string& key) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::where(const std::string& key) const {
  auto it = origins_.find(key);
  return "config key '" + key + "'" + (it != origins_.end() ? " (" + it->second + ")" : "");
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) {
  const auto v = raw(key).value_or(fallback);
  record(key, v);
  return v;
}

double RunConfig::real(const std::string& key, double fallback) {
  double v = fallback;
  if (auto s = raw(key)) {
    auto p = parse_double(*s);
    if (!p) throw Error(ErrorKind::configuration, where(key) + ": expected a number, got '" + *s + "'");
    v = *p;
  }
  record(key, format_double(v));
  return v;
}

std::size_t RunConfig::count(const std::string& key, std::size_t fallback) {
  std::size_t v = fallback;
  if (auto s = raw(key)) {
    auto p = parse_integer(*s);
    if (!p || *p < 0) throw Error(ErrorKind::configuration, where(key) + ": expected a nonnegative integer, got '" + *s + "'");
    v = static_cast<std::size_t>(*p);
  }
  record(key, std::to_string(v));
  return v;
}

std::uint64_t RunConfig::integer(const std::string& key, std::uint64_t fallback) {
  std::uint64_t v = fallback;
  if (auto s = raw(key)) {
    try {
      std::size_t used = 0;
      v = std::stoull(*s, &used);
      if (used != s->size() || s->front() == '-') throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::configuration, where(key) + ": expected an unsigned integer, got '" + *s + "'");
    }
  }
  record(key, std::to_string(v));
  return v;
}

bool RunConfig::flag(const std::string& key, bool fallback) {
  bool v = fallback;
  if (auto s = raw(key)) {
    if (*s == "true" || *s == "1" || *s == "yes" || *s == "on")
      v = true;
    else if (*s == "false" || *s == "0" || *s == "no" || *s == "off")
      v = false;
    else
      throw Error(ErrorKind::configuration, where(key) + ": expected true or false, got '" + *s + "'");
  }
  record(key, v ? "true" : "false");
  return v;
}

std::map<std::string, std::string> RunConfig::with_prefix(const std::string& prefix) {
  std::map<std::string, std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : values_) {
    if (k.rfind(p, 0) != 0) continue;
    used_.insert(k);
    record(k, v);
    out[k.substr(p.size())] = v;
  }
  return out;
}

void RunConfig::reject_unused() const {
  std::vector<std::string> unknown;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) unknown.push_back(where(k));
  if (!unknown.empty()) throw Error(ErrorKind::configuration, "unknown parameter: " + join(unknown, "; "));
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : resolved_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace granular::cli
