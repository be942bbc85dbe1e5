#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "granular/error.hpp"
#include "granular/random.hpp"
#include "granular/sorst.hpp"

using namespace granular;
using namespace granular::sorst;

namespace {

// Decision fully determined by which of three bands `a` falls in.
DecisionTable separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const int band = static_cast<int>(i % 3);
    ids.push_back("s" + std::to_string(i));
    rows.push_back({band * 10.0 + rng.uniform(0, 1), rng.uniform(0, 1), 1.0 + 4.0 * band + rng.uniform(0, 0.1)});
  }
  return DecisionTable(ids,
                       {{"a", Role::condition, Kind::numeric},
                        {"b", Role::condition, Kind::numeric},
                        {"d", Role::decision, Kind::numeric}},
                       rows);
}

DecisionTable noisy(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(0, 10), b = rng.uniform(0, 10), c = rng.uniform(0, 10);
    ids.push_back("q" + std::to_string(i));
    rows.push_back({a, b, c, a - b + 2.0 * rng.normal()});
  }
  return DecisionTable(ids,
                       {{"a", Role::condition, Kind::numeric},
                        {"b", Role::condition, Kind::numeric},
                        {"c", Role::condition, Kind::numeric},
                        {"y", Role::decision, Kind::numeric}},
                       rows);
}

SorstConfig quick(std::uint64_t seed) {
  SorstConfig c;
  c.seed = seed;
  c.som_epochs = 30;
  return c;
}

}  // namespace

TEST_CASE("discretize_table") {
  const auto t = noisy(60, 1);
  auto c = quick(2);
  const auto d = discretize_table(t, c);
  for (std::size_t i = 0; i < d.table.size(); ++i) {
    for (int v : d.table.row(i)) CHECK((v >= 1 && v <= 3));
    CHECK((d.table.decision_value(i) >= 1 && d.table.decision_value(i) <= 3));
  }
  CHECK(d.level_maps.attributes.size() == 4);

  // monotone attribute gives a monotone level sequence
  const auto a = t.numeric_column(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[i] <= a[j]) REQUIRE(d.table.value(i, 0) <= d.table.value(j, 0));

  SUBCASE("constant attribute") {
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) {
      ids.push_back(std::to_string(i));
      rows.push_back({5.0, static_cast<double>(i)});
    }
    const DecisionTable ct(ids, {{"k", Role::condition, Kind::numeric}, {"d", Role::decision, Kind::numeric}}, rows);
    const auto dc = discretize_table(ct, c);
    CHECK(dc.degenerate == std::vector<std::string>{"k"});
    for (std::size_t i = 0; i < 10; ++i) CHECK(dc.table.value(i, 0) == 1);
  }
  SUBCASE("per-attribute level counts") {
    c.levels_per_attribute["y"] = 5;
    const auto d5 = discretize_table(t, c);
    CHECK(d5.level_maps.of("y").size() == 5);
    CHECK(d5.level_maps.of("a").size() == 3);
  }
}

TEST_CASE("strength filter") {
  rst::RoughRuleSet set;
  set.conditions = {{"a", {}}};
  set.decision = {"d", {}};
  set.rules = {{{{0, {1}}}, {1}, 1.0, 1}, {{{0, {2}}}, {2}, 0.5, 1}, {{{0, {3}}}, {1}, 0.3, 1}};
  CHECK(strength_filter(set, 0.0) == set);
  const auto f = strength_filter(set, 0.4);
  REQUIRE(f.rules.size() == 2);
  CHECK(f.rules[0].dependency_factor == 1.0);
  CHECK(f.rules[1].dependency_factor == 0.5);
  CHECK_THROWS_AS(strength_filter(set, 1.5), Error);

  // consistent table, covered reading: every rule has df 1
  rst::SymbolicTable t({{"a", {}}}, {"d", {}}, {{1}, {2}, {3}}, {1, 2, 1});
  rst::InductionOptions o;
  o.universe = rst::DfUniverse::covered;
  const auto rules = rst::induce_rules(t, o);
  CHECK(strength_filter(rules, 1.0) == rules);
}

TEST_CASE("separable table is classified without error") {
  const auto train = separable(90, 1);
  const auto test = separable(30, 2);
  auto c = quick(4);
  c.structures = 3;
  const auto r = run_sorst(train, test, c);
  REQUIRE(!r.empty());
  const auto& best = r.records[*r.best_index];
  CHECK(best.test_mse == 0.0);
  CHECK(best.unmatched == 0);
}

TEST_CASE("full-size run invariants") {
  const auto train = noisy(200, 5);
  const auto test = noisy(40, 6);
  auto c = quick(7);
  c.structures = 7;
  const auto r = run_sorst(train, test, c);
  REQUIRE(r.records.size() == 7);
  for (const auto& rec : r.records) {
    CHECK(rec.neuron_count >= c.neuron_min);
    CHECK(rec.neuron_count <= c.neuron_max);
    CHECK(rec.granule_count <= rec.neuron_count);
    for (const auto& rule : rec.rule_set.rules) {
      CHECK(rule.dependency_factor >= c.strength_threshold);
      CHECK(rule.exact());
    }
    if (rec.rejected) continue;
    // direct recount of the penalized MSE
    double sum = 0.0;
    std::size_t unmatched = 0;
    for (std::size_t i = 0; i < rec.actual.size(); ++i) {
      if (!rec.predicted[i]) {
        sum += 1.0;
        ++unmatched;
      } else {
        const double d = rec.actual[i] - *rec.predicted[i];
        sum += d * d;
      }
    }
    CHECK(rec.unmatched == unmatched);
    CHECK(rec.test_mse == doctest::Approx(sum / rec.actual.size()).epsilon(1e-15));
  }
  if (r.best_index)
    for (const auto& rec : r.records)
      if (!rec.rejected) CHECK(r.records[*r.best_index].test_mse <= rec.test_mse);

  SUBCASE("deterministic and schedule independent") {
    auto serial = c;
    serial.parallel = false;
    const auto s = run_sorst(train, test, serial);
    CHECK(structures_to_csv(s) == structures_to_csv(r));
    CHECK(structures_to_csv(run_sorst(train, test, c)) == structures_to_csv(r));
  }
  SUBCASE("unmatched objects are exported as the fallback code") {
    for (const auto& rec : r.records) {
      if (rec.rejected) continue;
      std::vector<std::string> ids(test.object_ids());
      const auto csv = predictions_to_csv(rec, ids, 4);
      std::size_t fours = 0, pos = 0;
      while ((pos = csv.find(",4\n", pos)) != std::string::npos) {
        ++fours;
        ++pos;
      }
      std::size_t predicted_four = 0;
      for (const auto& p : rec.predicted) predicted_four += p && *p == 4;
      CHECK(fours == rec.unmatched + predicted_four);
    }
  }
}

TEST_CASE("all structures rejected leaves an empty result with diagnostics") {
  const auto train = noisy(60, 8);
  const auto test = noisy(20, 9);
  auto c = quick(1);
  c.structures = 2;
  c.strength_threshold = 1.0;
  const auto r = run_sorst(train, test, c);
  CHECK(r.empty());
  CHECK(!r.diagnostics.empty());
  for (const auto& rec : r.records) CHECK(rec.rejected);

  SUBCASE("adaptive threshold decays until a structure passes") {
    c.adaptive_strength = true;
    const auto a = run_sorst(train, test, c);
    CHECK(!a.empty());
    CHECK(a.threshold_schedule.size() > 1);
    for (std::size_t k = 1; k < a.threshold_schedule.size(); ++k)
      CHECK(a.threshold_schedule[k] == doctest::Approx(a.threshold_schedule[k - 1] * 0.5));
  }
}

TEST_CASE("rough model JSON round-trip and raw classification") {
  const auto train = separable(60, 3);
  const auto test = separable(30, 4);
  auto c = quick(2);
  c.structures = 1;
  const auto r = run_sorst(train, test, c);
  REQUIRE(!r.empty());
  const auto& rec = r.records[*r.best_index];
  RoughModel m{rec.rule_set, rec.level_maps};
  const auto back = rough_model_from_json(rough_model_to_json(m));
  CHECK(back.rules == m.rules);
  CHECK(back.level_maps == m.level_maps);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x{rng.uniform(-5, 30), rng.uniform(0, 1)};
    CHECK(classify_raw(back, x) == classify_raw(m, x));
  }
  CHECK_THROWS_AS(classify_raw(m, std::vector<double>{1.0}), Error);
}
