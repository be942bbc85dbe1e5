#include "granular/rst.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "granular/error.hpp"
#include "granular/format.hpp"

namespace granular::rst {

std::string AttributeSchema::label(int code) const {
  if (labels.empty()) return std::to_string(code);
  if (code < 0 || static_cast<std::size_t>(code) >= labels.size()) return std::to_string(code);
  return labels[static_cast<std::size_t>(code)];
}

std::optional<int> AttributeSchema::code(std::string_view text) const {
  if (labels.empty()) {
    if (auto v = parse_integer(text)) return static_cast<int>(*v);
    return std::nullopt;
  }
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == text) return static_cast<int>(k);
  return std::nullopt;
}

SymbolicTable::SymbolicTable(std::vector<AttributeSchema> conditions, AttributeSchema decision,
                             std::vector<std::vector<int>> rows, std::vector<int> decisions,
                             std::vector<std::string> object_ids)
    : conditions_(std::move(conditions)),
      decision_(std::move(decision)),
      rows_(std::move(rows)),
      decisions_(std::move(decisions)),
      ids_(std::move(object_ids)) {
  if (conditions_.empty()) throw Error(ErrorKind::configuration, "rst: table needs a condition attribute");
  if (conditions_.size() > kMaxConditions)
    throw Error(ErrorKind::configuration, "rst: at most 64 condition attributes are supported");
  if (rows_.size() != decisions_.size()) throw Error(ErrorKind::shape, "rst: decision count mismatch");
  for (const auto& r : rows_)
    if (r.size() != conditions_.size()) throw Error(ErrorKind::shape, "rst: row arity mismatch");
  if (ids_.empty())
    for (std::size_t i = 0; i < rows_.size(); ++i) ids_.push_back("x" + std::to_string(i + 1));
  if (ids_.size() != rows_.size()) throw Error(ErrorKind::shape, "rst: object id count mismatch");
}

namespace {

std::optional<int> integral_code(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isfinite(*d) && std::floor(*d) == *d && std::abs(*d) < 1e9) return static_cast<int>(*d);
    return std::nullopt;
  }
  if (auto v = parse_integer(std::get<std::string>(cell))) return static_cast<int>(*v);
  return std::nullopt;
}

std::string cell_text(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::get<std::string>(cell);
}

// Codes for one column plus its schema.
std::pair<AttributeSchema, std::vector<int>> encode_column(const DecisionTable& table, std::size_t j) {
  AttributeSchema schema{table.attributes()[j].name, {}};
  std::vector<int> codes(table.size());
  bool integral = true;
  for (std::size_t i = 0; i < table.size() && integral; ++i) {
    if (auto c = integral_code(table.cell(i, j)))
      codes[i] = *c;
    else
      integral = false;
  }
  if (integral) return {schema, codes};
  std::set<std::string> values;
  for (std::size_t i = 0; i < table.size(); ++i) values.insert(cell_text(table.cell(i, j)));
  schema.labels.assign(values.begin(), values.end());
  for (std::size_t i = 0; i < table.size(); ++i) codes[i] = *schema.code(cell_text(table.cell(i, j)));
  return {schema, codes};
}

}  // namespace

SymbolicTable SymbolicTable::from_decision_table(const DecisionTable& table) {
  const auto decision = table.decision_index();
  if (!decision) throw Error(ErrorKind::induction, "rst: table has no decision attribute");
  std::vector<AttributeSchema> schemas;
  std::vector<std::vector<int>> rows(table.size());
  for (auto j : table.condition_indices()) {
    auto [schema, codes] = encode_column(table, j);
    schemas.push_back(std::move(schema));
    for (std::size_t i = 0; i < table.size(); ++i) rows[i].push_back(codes[i]);
  }
  auto [dschema, dcodes] = encode_column(table, *decision);
  return SymbolicTable(std::move(schemas), std::move(dschema), std::move(rows), std::move(dcodes), table.object_ids());
}

std::size_t SymbolicTable::attribute_index(std::string_view name) const {
  for (std::size_t j = 0; j < conditions_.size(); ++j)
    if (conditions_[j].name == name) return j;
  throw Error(ErrorKind::attribute, "rst: unknown condition attribute '" + std::string(name) + "'");
}

AttrMask SymbolicTable::mask_of(std::span<const std::string> names) const {
  AttrMask m = 0;
  for (const auto& n : names) m |= AttrMask{1} << attribute_index(n);
  return m;
}

AttrMask SymbolicTable::all_conditions() const noexcept {
  return conditions_.size() == 64 ? ~AttrMask{0} : (AttrMask{1} << conditions_.size()) - 1;
}

std::vector<std::string> SymbolicTable::names_of(AttrMask mask) const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < conditions_.size(); ++j)
    if (mask >> j & 1) out.push_back(conditions_[j].name);
  return out;
}

namespace {

std::vector<int> project(std::span<const int> row, AttrMask attrs) {
  std::vector<int> key;
  for (std::size_t j = 0; j < row.size(); ++j)
    if (attrs >> j & 1) key.push_back(row[j]);
  return key;
}

void check_mask(const SymbolicTable& table, AttrMask attrs) {
  if (attrs & ~table.all_conditions()) throw Error(ErrorKind::attribute, "rst: attribute mask out of range");
}

}  // namespace

Partition indiscernibility_classes(const SymbolicTable& table, AttrMask attrs) {
  check_mask(table, attrs);
  std::map<std::vector<int>, std::size_t> slot;
  Partition classes;
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(project(table.row(i), attrs), classes.size());
    if (inserted) classes.emplace_back();
    classes[it->second].push_back(i);
  }
  return classes;
}

Partition indiscernibility_classes(const SymbolicTable& table, std::span<const std::string> attrs) {
  return indiscernibility_classes(table, table.mask_of(attrs));
}

ObjectSet lower_approximation(const SymbolicTable& table, AttrMask attrs, const ObjectSet& target) {
  std::vector<char> in(table.size(), 0);
  for (auto x : target) in.at(x) = 1;
  ObjectSet out;
  for (const auto& cls : indiscernibility_classes(table, attrs))
    if (std::all_of(cls.begin(), cls.end(), [&](std::size_t x) { return in[x]; })) out.insert(out.end(), cls.begin(), cls.end());
  std::sort(out.begin(), out.end());
  return out;
}

ObjectSet upper_approximation(const SymbolicTable& table, AttrMask attrs, const ObjectSet& target) {
  std::vector<char> in(table.size(), 0);
  for (auto x : target) in.at(x) = 1;
  ObjectSet out;
  for (const auto& cls : indiscernibility_classes(table, attrs))
    if (std::any_of(cls.begin(), cls.end(), [&](std::size_t x) { return in[x]; })) out.insert(out.end(), cls.begin(), cls.end());
  std::sort(out.begin(), out.end());
  return out;
}

ObjectSet lower_approximation(const SymbolicTable& table, std::span<const std::string> attrs, const ObjectSet& target) {
  return lower_approximation(table, table.mask_of(attrs), target);
}

ObjectSet upper_approximation(const SymbolicTable& table, std::span<const std::string> attrs, const ObjectSet& target) {
  return upper_approximation(table, table.mask_of(attrs), target);
}

DiscernibilityMatrix::DiscernibilityMatrix(std::size_t objects, std::size_t attributes, std::vector<AttrMask> lower_triangle)
    : objects_(objects), attributes_(attributes), entries_(std::move(lower_triangle)) {
  if (entries_.size() != objects_ * (objects_ ? objects_ - 1 : 0) / 2)
    throw Error(ErrorKind::shape, "rst: discernibility entry count mismatch");
}

AttrMask DiscernibilityMatrix::entry(std::size_t i, std::size_t j) const {
  if (i == j) return 0;
  if (i < j) std::swap(i, j);
  return entries_.at(i * (i - 1) / 2 + j);
}

std::vector<AttrMask> DiscernibilityMatrix::clauses() const {
  std::set<AttrMask> distinct;
  for (auto e : entries_)
    if (e) distinct.insert(e);
  return {distinct.begin(), distinct.end()};
}

namespace {

AttrMask differing(const SymbolicTable& table, std::size_t i, std::size_t j) {
  AttrMask m = 0;
  for (std::size_t a = 0; a < table.condition_count(); ++a)
    if (table.value(i, a) != table.value(j, a)) m |= AttrMask{1} << a;
  return m;
}

}  // namespace

DiscernibilityMatrix discernibility_matrix(const SymbolicTable& table) {
  const std::size_t n = table.size();
  std::vector<AttrMask> entries(n * (n ? n - 1 : 0) / 2);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t ii = 1; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < i; ++j) entries[i * (i - 1) / 2 + j] = differing(table, i, j);
  }
  return DiscernibilityMatrix(n, table.condition_count(), std::move(entries));
}

DiscernibilityMatrix discernibility_matrix_serial(const SymbolicTable& table) {
  const std::size_t n = table.size();
  std::vector<AttrMask> entries;
  entries.reserve(n * (n ? n - 1 : 0) / 2);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) entries.push_back(differing(table, i, j));
  return DiscernibilityMatrix(n, table.condition_count(), std::move(entries));
}

namespace {

// Drops duplicates and every set that strictly contains another member.
std::vector<AttrMask> keep_minimal(std::vector<AttrMask> sets) {
  std::sort(sets.begin(), sets.end(), [](AttrMask a, AttrMask b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<AttrMask> out;
  for (auto s : sets)
    if (std::none_of(out.begin(), out.end(), [s](AttrMask m) { return (m & s) == m; })) out.push_back(s);
  return out;
}

// Orders by size, then lexicographically by ascending attribute indices.
bool attribute_order(AttrMask a, AttrMask b) {
  const int pa = std::popcount(a), pb = std::popcount(b);
  if (pa != pb) return pa < pb;
  while (a && b) {
    const int la = std::countr_zero(a), lb = std::countr_zero(b);
    if (la != lb) return la < lb;
    a &= a - 1;
    b &= b - 1;
  }
  return false;
}

}  // namespace

std::vector<AttrMask> minimal_hitting_sets(std::vector<AttrMask> clauses) {
  std::erase(clauses, AttrMask{0});
  clauses = keep_minimal(std::move(clauses));  // absorption law
  std::vector<AttrMask> partial{0};
  for (auto clause : clauses) {
    std::vector<AttrMask> next;
    for (auto s : partial) {
      if (s & clause) {
        next.push_back(s);
        continue;
      }
      for (AttrMask rest = clause; rest; rest &= rest - 1) next.push_back(s | (rest & -rest));
    }
    partial = keep_minimal(std::move(next));
  }
  std::sort(partial.begin(), partial.end(), attribute_order);
  return partial;
}

ReductResult reducts(const DiscernibilityMatrix& matrix, std::size_t exact_bound) {
  ReductResult result;
  const auto clauses = matrix.clauses();
  if (clauses.empty()) {
    result.reducts = {0};
    result.degenerate = true;
    return result;
  }
  if (matrix.objects() <= exact_bound) {
    result.reducts = minimal_hitting_sets(clauses);
    return result;
  }
  const auto minimal = keep_minimal(clauses);
  AttrMask chosen = 0;
  auto uncovered = [&](AttrMask set) {
    std::vector<AttrMask> out;
    for (auto c : minimal)
      if (!(c & set)) out.push_back(c);
    return out;
  };
  for (auto open = uncovered(chosen); !open.empty(); open = uncovered(chosen)) {
    std::size_t best = 0;
    std::size_t best_count = 0;
    for (std::size_t a = 0; a < matrix.attributes(); ++a) {
      std::size_t count = 0;
      for (auto c : open) count += c >> a & 1;
      if (count > best_count) {
        best_count = count;
        best = a;
      }
    }
    chosen |= AttrMask{1} << best;
  }
  for (std::size_t a = matrix.attributes(); a-- > 0;) {
    const AttrMask bit = AttrMask{1} << a;
    if ((chosen & bit) && uncovered(chosen & ~bit).empty()) chosen &= ~bit;
  }
  result.reducts = {chosen};
  result.heuristic = true;
  return result;
}

AttrMask RoughRule::attributes() const noexcept {
  AttrMask m = 0;
  for (const auto& d : conditions) m |= AttrMask{1} << d.attribute;
  return m;
}

bool RoughRule::matches(std::span<const int> object) const {
  for (const auto& d : conditions)
    if (!std::binary_search(d.values.begin(), d.values.end(), object[d.attribute])) return false;
  return true;
}

double dependency_factor(const SymbolicTable& table, const RoughRule& rule, DfUniverse universe) {
  if (table.size() == 0) throw Error(ErrorKind::measure, "rst: dependency factor over an empty universe");
  const AttrMask attrs = rule.attributes();
  check_mask(table, attrs);
  ObjectSet target;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (std::binary_search(rule.decisions.begin(), rule.decisions.end(), table.decision_value(i))) target.push_back(i);
  const ObjectSet positive = lower_approximation(table, attrs, target);
  std::size_t matched = 0, certain = 0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    while (p < positive.size() && positive[p] < i) ++p;
    if (!rule.matches(table.row(i))) continue;
    ++matched;
    if (p < positive.size() && positive[p] == i) ++certain;
  }
  if (universe == DfUniverse::covered)
    return matched ? static_cast<double>(certain) / static_cast<double>(matched) : 0.0;
  return static_cast<double>(certain) / static_cast<double>(table.size());
}

namespace {

struct Candidate {
  RoughRule rule;
  ObjectSet matched;
};

ObjectSet matched_objects(const SymbolicTable& table, const RoughRule& rule) {
  ObjectSet out;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (rule.matches(table.row(i))) out.push_back(i);
  return out;
}

std::size_t support_of(const SymbolicTable& table, const RoughRule& rule) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (rule.matches(table.row(i)) &&
        std::binary_search(rule.decisions.begin(), rule.decisions.end(), table.decision_value(i)))
      ++n;
  return n;
}

// Generalized decision of each object: decisions among its full-condition class.
std::vector<std::vector<int>> generalized_decisions(const SymbolicTable& table) {
  std::vector<std::vector<int>> out(table.size());
  for (const auto& cls : indiscernibility_classes(table, table.all_conditions())) {
    std::vector<int> ds;
    for (auto x : cls) ds.push_back(table.decision_value(x));
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    for (auto x : cls) out[x] = ds;
  }
  return out;
}

// All prime rules: one per object-relative reduct of every object.
std::vector<RoughRule> prime_rules(const SymbolicTable& table) {
  const auto general = generalized_decisions(table);
  std::vector<RoughRule> rules;
  std::set<std::pair<std::vector<std::pair<std::size_t, int>>, std::vector<int>>> seen;
  for (std::size_t x = 0; x < table.size(); ++x) {
    std::vector<AttrMask> clauses;
    for (std::size_t y = 0; y < table.size(); ++y)
      if (!std::binary_search(general[x].begin(), general[x].end(), table.decision_value(y)))
        clauses.push_back(differing(table, x, y));
    for (auto reduct : minimal_hitting_sets(std::move(clauses))) {
      RoughRule rule;
      std::vector<std::pair<std::size_t, int>> key;
      for (std::size_t a = 0; a < table.condition_count(); ++a) {
        if (!(reduct >> a & 1)) continue;
        rule.conditions.push_back({a, {table.value(x, a)}});
        key.emplace_back(a, table.value(x, a));
      }
      rule.decisions = general[x];
      if (seen.emplace(key, rule.decisions).second) rules.push_back(std::move(rule));
    }
  }
  return rules;
}

// Index of the single descriptor position where a and b differ, if exactly one.
std::optional<std::size_t> single_difference(const RoughRule& a, const RoughRule& b) {
  if (a.conditions.size() != b.conditions.size()) return std::nullopt;
  std::optional<std::size_t> diff;
  for (std::size_t k = 0; k < a.conditions.size(); ++k) {
    if (a.conditions[k].attribute != b.conditions[k].attribute) return std::nullopt;
    if (a.conditions[k].values != b.conditions[k].values) {
      if (diff) return std::nullopt;
      diff = k;
    }
  }
  return diff;
}

std::vector<RoughRule> merge_value_sets(std::vector<RoughRule> rules) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < rules.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < rules.size() && !merged; ++j) {
        if (rules[i].decisions != rules[j].decisions) continue;
        const auto k = single_difference(rules[i], rules[j]);
        if (!k) continue;
        auto& values = rules[i].conditions[*k].values;
        const auto& other = rules[j].conditions[*k].values;
        values.insert(values.end(), other.begin(), other.end());
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }
  return rules;
}

std::vector<RoughRule> greedy_cover(const SymbolicTable& table, const std::vector<RoughRule>& candidates) {
  std::vector<Candidate> pool;
  std::vector<char> coverable(table.size(), 0);
  for (const auto& r : candidates) {
    pool.push_back({r, matched_objects(table, r)});
    for (auto x : pool.back().matched) coverable[x] = 1;
  }
  std::vector<char> covered(table.size(), 0);
  std::vector<RoughRule> chosen;
  std::vector<char> used(pool.size(), 0);
  while (true) {
    std::size_t best = pool.size();
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (used[c]) continue;
      std::size_t gain = 0;
      for (auto x : pool[c].matched) gain += !covered[x];
      if (gain == 0) continue;
      const bool better = gain > best_gain ||
                          (gain == best_gain && pool[c].rule.conditions.size() < pool[best].rule.conditions.size());
      if (better) {
        best = c;
        best_gain = gain;
      }
    }
    if (best == pool.size()) break;
    used[best] = 1;
    for (auto x : pool[best].matched) covered[x] = 1;
    chosen.push_back(pool[best].rule);
  }
  return chosen;
}

}  // namespace

RoughRuleSet induce_rules(const SymbolicTable& table, const InductionOptions& options) {
  if (table.size() == 0) throw Error(ErrorKind::induction, "rst: cannot induce rules from an empty table");
  if (options.strength_threshold < 0.0 || options.strength_threshold > 1.0)
    throw Error(ErrorKind::configuration, "rst: strength threshold must be in [0, 1]");

  auto candidates = prime_rules(table);
  if (options.exact_only) std::erase_if(candidates, [](const RoughRule& r) { return !r.exact(); });

  std::vector<RoughRule> rules;
  switch (options.strategy) {
    case Strategy::exhaustive:
      rules = std::move(candidates);
      break;
    case Strategy::minimal:
      rules = greedy_cover(table, candidates);
      break;
    case Strategy::strong:
      rules = std::move(candidates);
      if (options.merge_value_sets) rules = merge_value_sets(std::move(rules));
      break;
  }
  if (options.strategy == Strategy::minimal && options.merge_value_sets) rules = merge_value_sets(std::move(rules));
  for (auto& r : rules) {
    r.dependency_factor = dependency_factor(table, r, options.universe);
    r.support = support_of(table, r);
  }
  if (options.strategy == Strategy::strong)
    std::erase_if(rules, [&](const RoughRule& r) { return r.dependency_factor < options.strength_threshold; });

  RoughRuleSet set;
  set.conditions = table.conditions();
  set.decision = table.decision();
  set.rules = std::move(rules);
  set.strategy = options.strategy;
  set.universe = options.universe;
  return set;
}

std::vector<std::size_t> rule_priority(const RoughRuleSet& rules, TiePolicy policy) {
  std::vector<std::size_t> order(rules.rules.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  if (policy == TiePolicy::listed_order) return order;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = rules.rules[a];
    const auto& rb = rules.rules[b];
    if (ra.dependency_factor != rb.dependency_factor) return ra.dependency_factor > rb.dependency_factor;
    if (ra.conditions.size() != rb.conditions.size()) return ra.conditions.size() < rb.conditions.size();
    const auto ma = ra.attributes(), mb = rb.attributes();
    if (ma != mb) return attribute_order(ma, mb);
    return false;
  });
  return order;
}

std::optional<int> classify(const RoughRuleSet& rules, std::span<const int> object, TiePolicy policy) {
  if (object.size() != rules.conditions.size())
    throw Error(ErrorKind::shape, "rst: object has " + std::to_string(object.size()) + " conditions, rules expect " +
                                      std::to_string(rules.conditions.size()));
  for (auto k : rule_priority(rules, policy)) {
    const auto& rule = rules.rules[k];
    if (rule.matches(object)) return rule.decisions.front();
  }
  return std::nullopt;
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::minimal: return "minimal";
    case Strategy::exhaustive: return "exhaustive";
    case Strategy::strong: return "strong";
  }
  return "minimal";
}

const char* to_string(DfUniverse u) { return u == DfUniverse::whole ? "whole" : "covered"; }

Strategy parse_strategy(std::string_view s) {
  if (s == "minimal") return Strategy::minimal;
  if (s == "exhaustive") return Strategy::exhaustive;
  if (s == "strong") return Strategy::strong;
  throw Error(ErrorKind::configuration, "unknown rule strategy '" + std::string(s) + "'");
}

DfUniverse parse_df_universe(std::string_view s) {
  if (s == "whole") return DfUniverse::whole;
  if (s == "covered") return DfUniverse::covered;
  throw Error(ErrorKind::configuration, "unknown dependency universe '" + std::string(s) + "'");
}

}  // namespace granular::rst
