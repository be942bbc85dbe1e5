#include "granular/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "granular/error.hpp"
#include "granular/format.hpp"
#include "granular/log.hpp"
#include "granular/random.hpp"

namespace granular {

DecisionTable::DecisionTable(std::vector<std::string> object_ids, std::vector<Attribute> attributes,
                             std::vector<std::vector<Cell>> rows)
    : ids_(std::move(object_ids)), attributes_(std::move(attributes)), rows_(std::move(rows)) {
  if (ids_.size() != rows_.size())
    throw Error(ErrorKind::shape, "object id count does not match row count");
  std::size_t conditions = 0;
  std::set<std::string> names;
  for (std::size_t j = 0; j < attributes_.size(); ++j) {
    const auto& a = attributes_[j];
    if (!names.insert(a.name).second)
      throw Error(ErrorKind::configuration, "duplicate attribute '" + a.name + "'");
    if (a.role == Role::condition) {
      ++conditions;
    } else {
      if (decision_) throw Error(ErrorKind::configuration, "more than one decision attribute");
      decision_ = j;
    }
  }
  if (conditions == 0) throw Error(ErrorKind::configuration, "table needs a condition attribute");
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!seen.insert(ids_[i]).second)
      throw Error(ErrorKind::ingestion, "duplicate object id '" + ids_[i] + "'");
    if (rows_[i].size() != attributes_.size())
      throw Error(ErrorKind::shape, "row " + std::to_string(i) + " has wrong arity");
    for (std::size_t j = 0; j < attributes_.size(); ++j) {
      const bool is_number = std::holds_alternative<double>(rows_[i][j]);
      if (is_number != (attributes_[j].kind == Kind::numeric))
        throw Error(ErrorKind::shape, "cell kind mismatch at object '" + ids_[i] + "', attribute '" +
                                          attributes_[j].name + "'");
    }
  }
}

std::size_t DecisionTable::attribute_index(std::string_view name) const {
  for (std::size_t j = 0; j < attributes_.size(); ++j)
    if (attributes_[j].name == name) return j;
  throw Error(ErrorKind::attribute, "unknown attribute '" + std::string(name) + "'");
}

std::vector<std::size_t> DecisionTable::condition_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < attributes_.size(); ++j)
    if (attributes_[j].role == Role::condition) out.push_back(j);
  return out;
}

std::vector<std::string> DecisionTable::condition_names() const {
  std::vector<std::string> out;
  for (const auto& a : attributes_)
    if (a.role == Role::condition) out.push_back(a.name);
  return out;
}

double DecisionTable::numeric(std::size_t i, std::size_t j) const {
  if (const auto* v = std::get_if<double>(&rows_[i][j])) return *v;
  throw Error(ErrorKind::shape, "attribute '" + attributes_[j].name + "' is not numeric");
}

std::vector<double> DecisionTable::numeric_column(std::size_t j) const {
  std::vector<double> out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = numeric(i, j);
  return out;
}

Matrix DecisionTable::numeric_matrix(std::span<const std::size_t> columns) const {
  for (auto j : columns)
    if (attributes_[j].kind != Kind::numeric)
      throw Error(ErrorKind::shape, "attribute '" + attributes_[j].name + "' is not numeric");
  Matrix out(rows_.size(), columns.size());
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (std::size_t k = 0; k < columns.size(); ++k) out(i, k) = std::get<double>(rows_[i][columns[k]]);
  return out;
}

Matrix DecisionTable::numeric_matrix() const {
  std::vector<std::size_t> all(attributes_.size());
  std::iota(all.begin(), all.end(), 0);
  return numeric_matrix(all);
}

DecisionTable DecisionTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> cells;
  ids.reserve(rows.size());
  cells.reserve(rows.size());
  for (auto i : rows) {
    ids.push_back(ids_.at(i));
    cells.push_back(rows_.at(i));
  }
  return DecisionTable(std::move(ids), attributes_, std::move(cells));
}

namespace {

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

DecisionTable load_decision_table(std::string_view source, const LoadOptions& options) {
  std::istringstream in{std::string(source)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = split(t, options.delimiter);
    break;
  }
  if (header.empty()) throw Error(ErrorKind::ingestion, "missing header row");

  std::optional<std::size_t> id_col;
  std::vector<Attribute> attributes;
  std::vector<std::size_t> source_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw Error(ErrorKind::ingestion, line_error(line_no, "empty column name"));
    if (!options.id_column.empty() && header[c] == options.id_column) {
      id_col = c;
      continue;
    }
    Attribute a;
    a.name = header[c];
    if (auto it = options.roles.find(a.name); it != options.roles.end()) a.role = it->second;
    attributes.push_back(a);
    source_col.push_back(c);
  }
  for (const auto& [name, role] : options.roles) {
    if (std::none_of(attributes.begin(), attributes.end(), [&](const Attribute& a) { return a.name == name; }))
      throw Error(ErrorKind::configuration, "role map names unknown attribute '" + name + "'");
  }
  for (const auto& [name, kind] : options.kinds) {
    if (std::none_of(attributes.begin(), attributes.end(), [&](const Attribute& a) { return a.name == name; }))
      throw Error(ErrorKind::configuration, "kind map names unknown attribute '" + name + "'");
  }
  const auto decisions = std::count_if(options.roles.begin(), options.roles.end(),
                                       [](const auto& kv) { return kv.second == Role::decision; });
  if (decisions != 1)
    throw Error(ErrorKind::configuration, "role map must name exactly one decision attribute");
  if (!options.id_column.empty() && !id_col)
    throw Error(ErrorKind::configuration, "id column '" + options.id_column + "' not in header");

  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  bool kinds_fixed = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, options.delimiter);
    if (fields.size() != header.size())
      throw Error(ErrorKind::ingestion,
                  line_error(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                          std::to_string(fields.size())));
    if (!kinds_fixed) {
      for (std::size_t k = 0; k < attributes.size(); ++k) {
        auto it = options.kinds.find(attributes[k].name);
        attributes[k].kind = it != options.kinds.end()
                                 ? it->second
                                 : (parse_double(fields[source_col[k]]) ? Kind::numeric : Kind::symbolic);
      }
      kinds_fixed = true;
    }
    std::vector<Cell> row;
    row.reserve(attributes.size());
    for (std::size_t k = 0; k < attributes.size(); ++k) {
      const auto& field = fields[source_col[k]];
      if (field.empty())
        throw Error(ErrorKind::ingestion,
                    line_error(line_no, "missing value for attribute '" + attributes[k].name + "'"));
      if (attributes[k].kind == Kind::numeric) {
        auto v = parse_double(field);
        if (!v)
          throw Error(ErrorKind::ingestion, line_error(line_no, "unparseable numeric value '" + field +
                                                                    "' for attribute '" + attributes[k].name + "'"));
        row.emplace_back(*v);
      } else {
        row.emplace_back(field);
      }
    }
    ids.push_back(id_col ? fields[*id_col] : "o" + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ingestion, "no objects");
  return DecisionTable(std::move(ids), std::move(attributes), std::move(rows));
}

DecisionTable load_decision_table_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_decision_table(buffer.str(), options);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string write_decision_table(const DecisionTable& table, char delimiter) {
  std::string out = "id";
  for (const auto& a : table.attributes()) {
    out += delimiter;
    out += a.name;
  }
  out += '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += table.object_ids()[i];
    for (const auto& c : table.row(i)) {
      out += delimiter;
      if (const auto* d = std::get_if<double>(&c))
        out += format_double(*d);
      else
        out += std::get<std::string>(c);
    }
    out += '\n';
  }
  return out;
}

TrainTestSplit split_train_test(const DecisionTable& table, std::size_t n_train, std::size_t n_test,
                                std::uint64_t seed) {
  if (n_train + n_test > table.size())
    throw Error(ErrorKind::size, "requested " + std::to_string(n_train) + " + " + std::to_string(n_test) +
                                     " objects but table holds " + std::to_string(table.size()));
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  const std::size_t discarded = table.size() - n_train - n_test;
  log(LogLevel::info, "split: " + std::to_string(n_train) + " train, " + std::to_string(n_test) + " test, " +
                          std::to_string(discarded) + " discarded");
  return TrainTestSplit{table.select_rows(train), table.select_rows(test), seed, discarded};
}

const std::vector<std::pair<std::string, double>>& twr_codes() {
  static const std::vector<std::pair<std::string, double>> codes = {
      {"Fresh", 0.0}, {"Fresh-SW", 0.5}, {"SW", 1.0},     {"Fresh-MW", 1.5}, {"SW-MW", 2.0},
      {"CW", 2.5},    {"MW", 3.0},       {"HW-MW", 3.5}, {"HW", 4.0},
  };
  return codes;
}

double encode_twr(std::string_view label) {
  for (const auto& [name, code] : twr_codes())
    if (name == label) return code;
  std::vector<std::string> names;
  for (const auto& kv : twr_codes()) names.push_back(kv.first);
  throw Error(ErrorKind::encoding,
              "unknown weathering label '" + std::string(label) + "'; valid labels: " + join(names, ", "));
}

std::string decode_twr(double code) {
  for (const auto& [name, c] : twr_codes())
    if (c == code) return name;
  throw Error(ErrorKind::encoding, "no weathering label for code " + format_double(code));
}

DecisionTable encode_twr_column(const DecisionTable& table, std::string_view column) {
  const auto j = table.attribute_index(column);
  if (table.attributes()[j].kind == Kind::numeric) return table;
  return table.map_symbolic(j, [](const std::string& s) { return encode_twr(s); });
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size())
    throw Error(ErrorKind::measure, "rmse: length mismatch");
  if (predicted.empty()) throw Error(ErrorKind::measure, "rmse: empty sequences");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = actual[i] - predicted[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

double mse_classification(std::span<const Classified> predicted, std::span<const double> actual,
                          double unrecognized_penalty) {
  if (predicted.size() != actual.size())
    throw Error(ErrorKind::measure, "mse: length mismatch");
  if (predicted.empty()) throw Error(ErrorKind::measure, "mse: empty sequences");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!predicted[i]) {
      sum += unrecognized_penalty;
    } else {
      const double d = actual[i] - *predicted[i];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(predicted.size());
}

}  // namespace granular
