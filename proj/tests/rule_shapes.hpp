#pragma once

// Decision tables built so that one target rule is forced: every target
// object matches the rule, and for each rule attribute there is a neighbour
// differing only in that attribute with a decision outside the rule's set.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "granular/rst.hpp"

namespace shapes {

struct Target {
  std::string text;                              // expected rule line
  std::map<std::string, std::vector<int>> when;  // attribute -> value set
  std::vector<int> decisions;
};

inline const std::vector<std::string>& attribute_names() {
  static const std::vector<std::string> names{"z", "l", "rqd", "twr"};
  return names;
}

inline int outside(const std::vector<int>& set) {
  for (int v = 1;; ++v)
    if (std::find(set.begin(), set.end(), v) == set.end()) return v;
}

inline granular::rst::SymbolicTable build(const Target& t) {
  const auto& names = attribute_names();
  std::vector<std::vector<int>> combos{{}};
  for (const auto& n : names) {
    std::vector<int> values{1};
    if (auto it = t.when.find(n); it != t.when.end()) values = it->second;
    std::vector<std::vector<int>> next;
    for (const auto& c : combos)
      for (int v : values) {
        auto e = c;
        e.push_back(v);
        next.push_back(e);
      }
    combos = next;
  }
  std::vector<std::vector<int>> rows;
  std::vector<int> decisions;
  const int other = outside(t.decisions);
  for (const auto& c : combos) {
    for (int d : t.decisions) {
      rows.push_back(c);
      decisions.push_back(d);
    }
    for (std::size_t a = 0; a < names.size(); ++a) {
      auto it = t.when.find(names[a]);
      if (it == t.when.end()) continue;
      auto n = c;
      n[a] = outside(it->second);
      rows.push_back(n);
      decisions.push_back(other);
    }
  }
  std::vector<granular::rst::AttributeSchema> schemas;
  for (const auto& n : names) schemas.push_back({n, {}});
  return granular::rst::SymbolicTable(schemas, {"Dec", {}}, rows, decisions);
}

// The eight rule shapes of the reference rule listing.
inline std::vector<Target> table_rules() {
  return {
      {"(z = 2) ⇒ (Dec = 1);", {{"z", {2}}}, {1}},
      {"(l in {2, 3}) & (rqd = 2) ⇒ (Dec = 1);", {{"l", {2, 3}}, {"rqd", {2}}}, {1}},
      {"(z = 3) & (l = 2) & (rqd = 1) ⇒ (Dec = 3);", {{"z", {3}}, {"l", {2}}, {"rqd", {1}}}, {3}},
      {"(l = 2) & (twr = 3) ⇒ (Dec = 3);", {{"l", {2}}, {"twr", {3}}}, {3}},
      {"(z = 3) & (l = 1) ⇒ (Dec = 1) OR (Dec = 3);", {{"z", {3}}, {"l", {1}}}, {1, 3}},
      {"(l in {1, 2}) & (twr = 2) ⇒ (Dec = 2);", {{"l", {1, 2}}, {"twr", {2}}}, {2}},
      {"(rqd = 2) & (twr = 3) ⇒ (Dec = 2) OR (Dec = 3);", {{"rqd", {2}}, {"twr", {3}}}, {2, 3}},
      {"(z = 1) & (rqd = 1) ⇒ (Dec = 2);", {{"z", {1}}, {"rqd", {1}}}, {2}},
  };
}

}  // namespace shapes
