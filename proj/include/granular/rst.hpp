#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "granular/data.hpp"

namespace granular::rst {

/// Bit j set <=> condition attribute j is in the set.
using AttrMask = std::uint64_t;
inline constexpr std::size_t kMaxConditions = 64;

/// Name plus optional value labels; without labels a value prints as its code.
struct AttributeSchema {
  std::string name;
  std::vector<std::string> labels;

  std::string label(int code) const;
  std::optional<int> code(std::string_view text) const;
  bool operator==(const AttributeSchema&) const = default;
};

/// Decision table over finite integer alphabets.
class SymbolicTable {
 public:
  SymbolicTable(std::vector<AttributeSchema> conditions, AttributeSchema decision,
                std::vector<std::vector<int>> rows, std::vector<int> decisions,
                std::vector<std::string> object_ids = {});

  /// Integral columns keep their values as codes; other symbolic columns get
  /// labels in lexicographic order. The table needs a decision attribute.
  static SymbolicTable from_decision_table(const DecisionTable& table);

  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t condition_count() const noexcept { return conditions_.size(); }
  const std::vector<AttributeSchema>& conditions() const noexcept { return conditions_; }
  const AttributeSchema& decision() const noexcept { return decision_; }
  const std::vector<std::string>& object_ids() const noexcept { return ids_; }

  int value(std::size_t object, std::size_t attribute) const { return rows_[object][attribute]; }
  std::span<const int> row(std::size_t object) const { return rows_[object]; }
  int decision_value(std::size_t object) const { return decisions_[object]; }
  const std::vector<int>& decisions() const noexcept { return decisions_; }

  /// Throws an attribute error for unknown names.
  std::size_t attribute_index(std::string_view name) const;
  AttrMask mask_of(std::span<const std::string> names) const;
  AttrMask all_conditions() const noexcept;
  std::vector<std::string> names_of(AttrMask mask) const;

 private:
  std::vector<AttributeSchema> conditions_;
  AttributeSchema decision_;
  std::vector<std::vector<int>> rows_;
  std::vector<int> decisions_;
  std::vector<std::string> ids_;
};

using ObjectSet = std::vector<std::size_t>;  // sorted ascending
using Partition = std::vector<ObjectSet>;    // classes ordered by first member

Partition indiscernibility_classes(const SymbolicTable& table, AttrMask attrs);
Partition indiscernibility_classes(const SymbolicTable& table, std::span<const std::string> attrs);

ObjectSet lower_approximation(const SymbolicTable& table, AttrMask attrs, const ObjectSet& target);
ObjectSet upper_approximation(const SymbolicTable& table, AttrMask attrs, const ObjectSet& target);
ObjectSet lower_approximation(const SymbolicTable& table, std::span<const std::string> attrs, const ObjectSet& target);
ObjectSet upper_approximation(const SymbolicTable& table, std::span<const std::string> attrs, const ObjectSet& target);

/// c_ij = condition attributes on which objects i and j differ.
class DiscernibilityMatrix {
 public:
  DiscernibilityMatrix(std::size_t objects, std::size_t attributes, std::vector<AttrMask> lower_triangle);

  std::size_t objects() const noexcept { return objects_; }
  std::size_t attributes() const noexcept { return attributes_; }
  /// Symmetric; the diagonal is empty.
  AttrMask entry(std::size_t i, std::size_t j) const;
  /// Distinct nonempty entries.
  std::vector<AttrMask> clauses() const;
  bool operator==(const DiscernibilityMatrix&) const = default;

 private:
  std::size_t objects_;
  std::size_t attributes_;
  std::vector<AttrMask> entries_;  // i > j at i * (i - 1) / 2 + j
};

DiscernibilityMatrix discernibility_matrix(const SymbolicTable& table);
DiscernibilityMatrix discernibility_matrix_serial(const SymbolicTable& table);

/// Prime implicants of the conjunction of the given disjunctions, i.e. the
/// minimal attribute sets hitting every clause. Sorted by size, then by
/// attribute indices.
std::vector<AttrMask> minimal_hitting_sets(std::vector<AttrMask> clauses);

struct ReductResult {
  std::vector<AttrMask> reducts;
  bool heuristic = false;
  bool degenerate = false;
};

/// Exact prime-implicant expansion for at most `exact_bound` objects;
/// otherwise a greedy superreduct shrunk by deletion (flagged heuristic).
ReductResult reducts(const DiscernibilityMatrix& matrix, std::size_t exact_bound = 12);

/// (attribute in values); a single value prints as (attribute = value).
struct Descriptor {
  std::size_t attribute = 0;
  std::vector<int> values;  // sorted, unique
  bool operator==(const Descriptor&) const = default;
};

struct RoughRule {
  std::vector<Descriptor> conditions;  // ordered by attribute
  std::vector<int> decisions;          // sorted, unique, nonempty
  double dependency_factor = 0.0;
  std::size_t support = 0;

  bool exact() const noexcept { return decisions.size() == 1; }
  AttrMask attributes() const noexcept;
  bool matches(std::span<const int> object) const;
  bool operator==(const RoughRule&) const = default;
};

enum class Strategy { minimal, exhaustive, strong };

/// Denominator of the dependency factor: the whole training universe, or
/// only the objects the rule's conditions match.
enum class DfUniverse { whole, covered };

struct RoughRuleSet {
  std::vector<AttributeSchema> conditions;
  AttributeSchema decision;
  std::vector<RoughRule> rules;
  int fallback_code = 4;
  Strategy strategy = Strategy::minimal;
  DfUniverse universe = DfUniverse::whole;

  bool operator==(const RoughRuleSet&) const = default;
};

/// Objects the rule matches whose rule-attribute class lies wholly inside the
/// rule's decision set, divided by the universe size (or the matched count).
double dependency_factor(const SymbolicTable& table, const RoughRule& rule, DfUniverse universe = DfUniverse::whole);

struct InductionOptions {
  Strategy strategy = Strategy::minimal;
  bool exact_only = true;
  double strength_threshold = 0.0;
  DfUniverse universe = DfUniverse::whole;
  /// Merge rules that differ in one descriptor into value-set descriptors
  /// (minimal and strong strategies).
  bool merge_value_sets = true;
};

RoughRuleSet induce_rules(const SymbolicTable& table, const InductionOptions& options = {});

enum class TiePolicy {
  /// Highest df, then fewest conditions, then attribute order, then position.
  highest_df_first,
  listed_order,
};

/// Decision of the first matching rule; a multi-decision rule answers its
/// lowest value. nullopt when nothing matches.
std::optional<int> classify(const RoughRuleSet& rules, std::span<const int> object,
                            TiePolicy policy = TiePolicy::highest_df_first);

/// Rule indices in the order classify() tries them.
std::vector<std::size_t> rule_priority(const RoughRuleSet& rules, TiePolicy policy);

const char* to_string(Strategy s);
const char* to_string(DfUniverse u);
Strategy parse_strategy(std::string_view s);
DfUniverse parse_df_universe(std::string_view s);

// Text and structured exports (rst_io.cpp).

/// e.g. "(l in {2, 3}) & (rqd = 2) ⇒ (Dec = 1);"
std::string format_rule(const RoughRuleSet& set, const RoughRule& rule, std::string_view decision_label = "Dec");
/// Numbered rule listing, one "index<TAB>rule" line per rule.
std::string format_rules(const RoughRuleSet& set, std::string_view decision_label = "Dec");

std::string rules_to_json(const RoughRuleSet& set);
RoughRuleSet rules_from_json(std::string_view text);

}  // namespace granular::rst
