#include "granular/sorst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "granular/error.hpp"
#include "granular/format.hpp"
#include "granular/log.hpp"
#include "granular/random.hpp"
#include "granular/som.hpp"
#include "granular/sonfis.hpp"

namespace granular::sorst {

std::size_t SorstConfig::levels_for(const std::string& attribute) const {
  auto it = levels_per_attribute.find(attribute);
  return it == levels_per_attribute.end() ? default_levels : it->second;
}

void SorstConfig::validate() const {
  if (structures < 1) throw Error(ErrorKind::configuration, "sorst: structures must be >= 1");
  if (default_levels < 1) throw Error(ErrorKind::configuration, "sorst: level counts must be >= 1");
  for (const auto& [name, k] : levels_per_attribute)
    if (k < 1) throw Error(ErrorKind::configuration, "sorst: level count for '" + name + "' must be >= 1");
  if (neuron_min < 1 || neuron_max < neuron_min) throw Error(ErrorKind::configuration, "sorst: bad neuron range");
  if (strength_threshold < 0.0 || strength_threshold > 1.0)
    throw Error(ErrorKind::configuration, "sorst: strength threshold must be in [0, 1]");
  if (adaptive_strength && !(strength_decay > 0.0 && strength_decay < 1.0))
    throw Error(ErrorKind::configuration, "sorst: strength decay must be in (0, 1)");
}

const std::vector<double>& LevelMaps::of(std::string_view attribute) const {
  for (std::size_t k = 0; k < attributes.size(); ++k)
    if (attributes[k] == attribute) return maps[k];
  throw Error(ErrorKind::attribute, "sorst: no level map for '" + std::string(attribute) + "'");
}

namespace {

void require_numeric_with_decision(const DecisionTable& table) {
  if (!table.decision_index()) throw Error(ErrorKind::configuration, "sorst: table has no decision attribute");
  for (const auto& a : table.attributes())
    if (a.kind != Kind::numeric) throw Error(ErrorKind::shape, "sorst: attribute '" + a.name + "' is not numeric");
}

}  // namespace

rst::SymbolicTable apply_level_maps(const DecisionTable& table, const LevelMaps& maps) {
  require_numeric_with_decision(table);
  const auto conditions = table.condition_indices();
  const auto decision = *table.decision_index();
  std::vector<rst::AttributeSchema> schemas;
  for (auto j : conditions) schemas.push_back({table.attributes()[j].name, {}});
  std::vector<std::vector<int>> rows(table.size());
  std::vector<int> decisions(table.size());
  std::vector<const std::vector<double>*> cmaps;
  for (auto j : conditions) cmaps.push_back(&maps.of(table.attributes()[j].name));
  const auto& dmap = maps.of(table.attributes()[decision].name);
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t k = 0; k < conditions.size(); ++k)
      rows[i].push_back(som::apply_level_map(*cmaps[k], table.numeric(i, conditions[k])));
    decisions[i] = som::apply_level_map(dmap, table.numeric(i, decision));
  }
  return rst::SymbolicTable(std::move(schemas), {table.attributes()[decision].name, {}}, std::move(rows),
                            std::move(decisions), table.object_ids());
}

Discretized discretize_table(const DecisionTable& table, const SorstConfig& config) {
  require_numeric_with_decision(table);
  if (table.size() == 0) throw Error(ErrorKind::size, "sorst: cannot discretize an empty table");
  LevelMaps maps;
  std::vector<std::string> degenerate;
  for (std::size_t j = 0; j < table.attribute_count(); ++j) {
    const auto& name = table.attributes()[j].name;
    const auto d = som::discretize_attribute(table.numeric_column(j), config.levels_for(name), derive_seed(config.seed, j));
    if (d.degenerate) degenerate.push_back(name);
    maps.attributes.push_back(name);
    maps.maps.push_back(d.level_map);
  }
  auto symbolic = apply_level_maps(table, maps);
  return Discretized{std::move(symbolic), std::move(maps), std::move(degenerate)};
}

rst::RoughRuleSet strength_filter(const rst::RoughRuleSet& rules, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) throw Error(ErrorKind::configuration, "strength threshold must be in [0, 1]");
  rst::RoughRuleSet out = rules;
  std::erase_if(out.rules, [threshold](const rst::RoughRule& r) { return r.dependency_factor < threshold; });
  return out;
}

namespace {

// Structure evaluation up to rule induction; the checkpoint runs afterwards
// so an adaptive threshold can be re-applied without retraining.
struct Induced {
  StructureRecord record;
  rst::RoughRuleSet all_rules;
  rst::SymbolicTable test_levels;
};

Induced induce_structure(const DecisionTable& train, const DecisionTable& test, const Matrix& train_all,
                         const std::vector<std::string>& names, const SorstConfig& config, std::size_t s) {
  StructureRecord rec;
  rec.index = s;
  Rng rng(derive_seed(config.seed, 5000 + s));
  rec.neuron_count = static_cast<std::size_t>(
      rng.integer(static_cast<long long>(config.neuron_min), static_cast<long long>(config.neuron_max)));
  const auto dims = sonfis::grid_dims(rec.neuron_count);
  rec.n1 = dims.n1;
  rec.n2 = dims.n2;
  som::SomTopology topo;
  topo.n1 = dims.n1;
  topo.n2 = dims.n2;
  topo.epochs = config.som_epochs;
  topo.seed = derive_seed(config.seed, 6000 + s);
  const auto grid = som::train_som(train_all, topo, names);
  const auto granules = som::crisp_granulate(grid, train);
  rec.granule_count = granules.prototypes_table.size();

  auto level_config = config;
  level_config.seed = derive_seed(config.seed, 7000 + s);
  auto fitted = discretize_table(config.fit_levels_on_raw ? train : granules.prototypes_table, level_config);
  if (!fitted.degenerate.empty()) rec.note = "degenerate levels: " + join(fitted.degenerate, " ");
  rec.level_maps = fitted.level_maps;
  const auto train_levels = apply_level_maps(granules.prototypes_table, rec.level_maps);
  auto test_levels = apply_level_maps(test, rec.level_maps);

  rst::InductionOptions options;
  options.strategy = config.strategy;
  options.exact_only = config.exact_only;
  options.strength_threshold = config.strength_threshold;
  options.universe = config.universe;
  auto rules = rst::induce_rules(train_levels, options);
  rules.fallback_code = config.fallback_code;
  for (const auto& r : rules.rules) rec.best_df = std::max(rec.best_df, r.dependency_factor);
  rec.actual = test_levels.decisions();
  return Induced{std::move(rec), std::move(rules), std::move(test_levels)};
}

void checkpoint_and_classify(Induced& s, double threshold) {
  auto& rec = s.record;
  rec.threshold = threshold;
  rec.rule_set = strength_filter(s.all_rules, threshold);
  rec.predicted.clear();
  rec.unmatched = 0;
  rec.rejected = rec.rule_set.rules.empty() || rec.best_df < threshold;
  if (rec.rejected) {
    rec.test_mse = std::numeric_limits<double>::infinity();
    return;
  }
  std::vector<Classified> classified;
  for (std::size_t i = 0; i < s.test_levels.size(); ++i) {
    const auto p = rst::classify(rec.rule_set, s.test_levels.row(i));
    rec.predicted.push_back(p);
    if (!p) ++rec.unmatched;
    classified.push_back(p ? Classified(*p) : std::nullopt);
  }
  std::vector<double> actual(rec.actual.begin(), rec.actual.end());
  rec.test_mse = mse_classification(classified, actual, 1.0);
}

}  // namespace

SorstResult run_sorst(const DecisionTable& train, const DecisionTable& test, const SorstConfig& config) {
  config.validate();
  require_numeric_with_decision(train);
  if (train.attributes() != test.attributes())
    throw Error(ErrorKind::shape, "sorst: train and test tables have different schemas");
  if (train.size() == 0 || test.size() == 0) throw Error(ErrorKind::size, "sorst: train and test must be nonempty");
  const Matrix train_all = train.numeric_matrix();
  std::vector<std::string> names;
  for (const auto& a : train.attributes()) names.push_back(a.name);

  const auto count = static_cast<std::ptrdiff_t>(config.structures);
  std::vector<std::optional<Induced>> induced(config.structures);
  std::vector<std::string> errors(config.structures);
#pragma omp parallel for schedule(dynamic, 1) if (config.parallel)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    try {
      induced[s] = induce_structure(train, test, train_all, names, config, static_cast<std::size_t>(s));
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  }

  SorstResult result;
  double threshold = config.strength_threshold;
  while (true) {
    result.threshold_schedule.push_back(threshold);
    bool any_pass = false;
    for (auto& s : induced) {
      if (!s) continue;
      checkpoint_and_classify(*s, threshold);
      any_pass = any_pass || !s->record.rejected;
    }
    if (any_pass || !config.adaptive_strength) break;
    const double next = threshold * config.strength_decay;
    if (next < config.strength_floor) break;
    threshold = next;
  }

  for (std::size_t s = 0; s < config.structures; ++s) {
    if (induced[s]) {
      result.records.push_back(std::move(induced[s]->record));
    } else {
      StructureRecord rec;
      rec.index = s;
      rec.rejected = true;
      rec.test_mse = std::numeric_limits<double>::infinity();
      rec.note = "failed: " + errors[s];
      result.records.push_back(std::move(rec));
    }
  }
  for (std::size_t s = 0; s < result.records.size(); ++s) {
    const auto& r = result.records[s];
    if (r.rejected) continue;
    if (!result.best_index || r.test_mse < result.records[*result.best_index].test_mse) result.best_index = s;
  }
  if (result.empty()) {
    result.diagnostics = "all " + std::to_string(config.structures) +
                         " structures rejected at the strength checkpoint; reopen crisp granulation";
    log(LogLevel::warning, "sorst: " + result.diagnostics);
  }
  return result;
}

std::string structures_to_csv(const SorstResult& result) {
  std::string out = "structure,neurons,n1,n2,granules,rules,rejected,mse\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.index) + "," + std::to_string(r.neuron_count) + "," + std::to_string(r.n1) + "," +
           std::to_string(r.n2) + "," + std::to_string(r.granule_count) + "," + std::to_string(r.rule_set.rules.size()) +
           "," + (r.rejected ? "1" : "0") + "," + format_double(r.test_mse) + "\n";
  }
  return out;
}

std::string predictions_to_csv(const StructureRecord& record, const std::vector<std::string>& ids, int fallback_code) {
  std::string out = "id,actual,predicted\n";
  for (std::size_t i = 0; i < record.predicted.size(); ++i) {
    const auto& p = record.predicted[i];
    out += (i < ids.size() ? ids[i] : std::to_string(i)) + "," + std::to_string(record.actual[i]) + "," +
           std::to_string(p ? *p : fallback_code) + "\n";
  }
  return out;
}

std::string rough_model_to_json(const RoughModel& model) {
  auto j = nlohmann::json::parse(rst::rules_to_json(model.rules));
  j["level_maps"] = nlohmann::json::array();
  for (std::size_t k = 0; k < model.level_maps.attributes.size(); ++k)
    j["level_maps"].push_back({{"attribute", model.level_maps.attributes[k]}, {"levels", model.level_maps.maps[k]}});
  return j.dump(2) + "\n";
}

RoughModel rough_model_from_json(std::string_view text) {
  RoughModel model;
  model.rules = rst::rules_from_json(text);
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("level_maps")) {
      for (const auto& m : j.at("level_maps")) {
        model.level_maps.attributes.push_back(m.at("attribute").get<std::string>());
        model.level_maps.maps.push_back(m.at("levels").get<std::vector<double>>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("rough model: malformed JSON: ") + e.what());
  }
  return model;
}

std::optional<int> classify_raw(const RoughModel& model, std::span<const double> conditions) {
  const auto& schema = model.rules.conditions;
  if (conditions.size() != schema.size())
    throw Error(ErrorKind::shape, "rough model expects " + std::to_string(schema.size()) + " conditions");
  std::vector<int> levels(conditions.size());
  for (std::size_t k = 0; k < conditions.size(); ++k)
    levels[k] = som::apply_level_map(model.level_maps.of(schema[k].name), conditions[k]);
  return rst::classify(model.rules, levels);
}

}  // namespace granular::sorst
