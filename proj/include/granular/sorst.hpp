#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "granular/data.hpp"
#include "granular/rst.hpp"

namespace granular::sorst {

struct SorstConfig {
  /// Level count per attribute name; unlisted attributes use default_levels.
  std::map<std::string, std::size_t> levels_per_attribute;
  std::size_t default_levels = 3;
  std::size_t neuron_min = 10;
  std::size_t neuron_max = 70;
  std::size_t structures = 7;
  double strength_threshold = 0.05;
  bool exact_only = true;
  int fallback_code = 4;
  std::uint64_t seed = 0;

  rst::Strategy strategy = rst::Strategy::minimal;
  rst::DfUniverse universe = rst::DfUniverse::whole;
  /// Fit level maps on the raw training table instead of the granules.
  bool fit_levels_on_raw = false;
  /// When every structure fails the checkpoint, multiply the threshold by
  /// strength_decay until one passes or it drops below strength_floor.
  bool adaptive_strength = false;
  double strength_decay = 0.5;
  double strength_floor = 1e-3;

  std::size_t som_epochs = 200;
  /// Evaluate structures with OpenMP; results are identical either way.
  bool parallel = true;

  std::size_t levels_for(const std::string& attribute) const;
  void validate() const;
};

/// Ascending level prototypes per attribute, in table attribute order.
struct LevelMaps {
  std::vector<std::string> attributes;
  std::vector<std::vector<double>> maps;

  const std::vector<double>& of(std::string_view attribute) const;
  bool operator==(const LevelMaps&) const = default;
};

struct Discretized {
  rst::SymbolicTable table;
  LevelMaps level_maps;
  /// Attributes whose effective level count fell short of the request.
  std::vector<std::string> degenerate;
};

/// Discretizes every attribute (decision included) with a 1-D SOM.
Discretized discretize_table(const DecisionTable& table, const SorstConfig& config);

/// Maps a numeric table to levels with fixed maps (no refitting).
rst::SymbolicTable apply_level_maps(const DecisionTable& table, const LevelMaps& maps);

/// Rules with dependency factor >= threshold, order preserved.
rst::RoughRuleSet strength_filter(const rst::RoughRuleSet& rules, double threshold);

struct StructureRecord {
  std::size_t index = 0;
  std::size_t neuron_count = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t granule_count = 0;
  rst::RoughRuleSet rule_set;  // after strength filtering
  LevelMaps level_maps;
  double best_df = 0.0;
  double threshold = 0.0;
  bool rejected = false;
  double test_mse = 0.0;
  std::vector<int> actual;                   // test decision levels
  std::vector<std::optional<int>> predicted; // nullopt = unrecognized
  std::size_t unmatched = 0;
  std::string note;
};

struct SorstResult {
  std::vector<StructureRecord> records;
  std::optional<std::size_t> best_index;
  /// Threshold used at each checkpoint pass (one entry unless adaptive).
  std::vector<double> threshold_schedule;
  std::string diagnostics;

  bool empty() const noexcept { return !best_index.has_value(); }
};

SorstResult run_sorst(const DecisionTable& train, const DecisionTable& test, const SorstConfig& config);

/// Rows of structure,neurons,n1,n2,granules,rules,rejected,mse.
std::string structures_to_csv(const SorstResult& result);

/// Rows of id,actual,predicted with unrecognized objects written as the fallback code.
std::string predictions_to_csv(const StructureRecord& record, const std::vector<std::string>& ids, int fallback_code);

/// Rule set plus level maps, enough to classify raw numeric objects.
struct RoughModel {
  rst::RoughRuleSet rules;
  LevelMaps level_maps;
};

std::string rough_model_to_json(const RoughModel& model);
RoughModel rough_model_from_json(std::string_view text);

/// Classifies a raw numeric condition vector (rule-set condition order).
std::optional<int> classify_raw(const RoughModel& model, std::span<const double> conditions);

}  // namespace granular::sorst
