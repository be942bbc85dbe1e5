#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "granular/matrix.hpp"

namespace granular {

enum class Role { condition, decision };
enum class Kind { numeric, symbolic };

struct Attribute {
  std::string name;
  Role role = Role::condition;
  Kind kind = Kind::numeric;

  bool operator==(const Attribute&) const = default;
};

using Cell = std::variant<double, std::string>;

/// Objects x attributes with condition/decision roles. Immutable after
/// construction; the constructor enforces the table invariants.
class DecisionTable {
 public:
  DecisionTable(std::vector<std::string> object_ids, std::vector<Attribute> attributes,
                std::vector<std::vector<Cell>> rows);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t attribute_count() const noexcept { return attributes_.size(); }

  const std::vector<std::string>& object_ids() const noexcept { return ids_; }
  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }
  const Cell& cell(std::size_t i, std::size_t j) const { return rows_[i][j]; }

  /// Index of the named attribute; throws an attribute error if absent.
  std::size_t attribute_index(std::string_view name) const;
  std::optional<std::size_t> decision_index() const noexcept { return decision_; }
  std::vector<std::size_t> condition_indices() const;
  std::vector<std::string> condition_names() const;

  double numeric(std::size_t i, std::size_t j) const;
  std::vector<double> numeric_column(std::size_t j) const;

  /// Numeric matrix over the given attribute columns (all must be numeric).
  Matrix numeric_matrix(std::span<const std::size_t> columns) const;
  /// Numeric matrix over every attribute in table order.
  Matrix numeric_matrix() const;

  DecisionTable select_rows(std::span<const std::size_t> rows) const;

  /// Copy with the named symbolic column mapped through `encode`.
  template <typename Encode>
  DecisionTable map_symbolic(std::size_t column, Encode&& encode) const;

 private:
  std::vector<std::string> ids_;
  std::vector<Attribute> attributes_;
  std::vector<std::vector<Cell>> rows_;
  std::optional<std::size_t> decision_;
};

struct LoadOptions {
  char delimiter = ',';
  /// Attribute name -> role. Unlisted attributes default to condition.
  std::map<std::string, Role> roles;
  /// Optional explicit kinds; otherwise inferred from the first data row.
  std::map<std::string, Kind> kinds;
  /// Column holding object identifiers (excluded from attributes); empty
  /// means identifiers are generated from line numbers.
  std::string id_column;
};

DecisionTable load_decision_table(std::string_view source, const LoadOptions& options);
DecisionTable load_decision_table_file(const std::string& path, const LoadOptions& options);

/// Delimiter-separated text with a header row, full-precision numerics.
std::string write_decision_table(const DecisionTable& table, char delimiter = ',');

struct TrainTestSplit {
  DecisionTable train;
  DecisionTable test;
  std::uint64_t seed = 0;
  std::size_t discarded = 0;
};

TrainTestSplit split_train_test(const DecisionTable& table, std::size_t n_train,
                                std::size_t n_test, std::uint64_t seed);

// Type of weathering rock codes.
double encode_twr(std::string_view label);
std::string decode_twr(double code);
const std::vector<std::pair<std::string, double>>& twr_codes();

/// Copy with a symbolic weathering-label column replaced by its codes.
DecisionTable encode_twr_column(const DecisionTable& table, std::string_view column);

double rmse(std::span<const double> predicted, std::span<const double> actual);

/// Class prediction; nullopt marks an unrecognized object.
using Classified = std::optional<double>;

double mse_classification(std::span<const Classified> predicted, std::span<const double> actual,
                          double unrecognized_penalty = 1.0);

template <typename Encode>
DecisionTable DecisionTable::map_symbolic(std::size_t column, Encode&& encode) const {
  auto attributes = attributes_;
  auto rows = rows_;
  attributes[column].kind = Kind::numeric;
  for (auto& r : rows) {
    if (auto* s = std::get_if<std::string>(&r[column])) r[column] = encode(*s);
  }
  return DecisionTable(ids_, std::move(attributes), std::move(rows));
}

}  // namespace granular
