#include <cmath>

#include "doctest.h"
#include "granular/error.hpp"
#include "granular/random.hpp"
#include "granular/sonfis.hpp"

using namespace granular;
using namespace granular::sonfis;

namespace {

DecisionTable smooth_table(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(0, 10), b = rng.uniform(0, 5);
    ids.push_back("o" + std::to_string(i));
    rows.push_back({a, b, std::sin(a / 3.0) + 0.2 * b});
  }
  return DecisionTable(ids,
                       {{"a", Role::condition, Kind::numeric},
                        {"b", Role::condition, Kind::numeric},
                        {"y", Role::decision, Kind::numeric}},
                       rows);
}

GranulationTrace trace_of(const std::vector<std::size_t>& counts, const std::vector<double>& errors = {}) {
  GranulationTrace t;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    IterationRecord r;
    r.t = k;
    r.neuron_count = counts[k];
    r.test_error = errors.empty() ? 1.0 : errors[k];
    t.records.push_back(r);
  }
  return t;
}

SonfisConfig quick_config(std::uint64_t seed) {
  SonfisConfig c;
  c.seed = seed;
  c.neuron_min = 4;
  c.neuron_max = 12;
  c.iterations = 3;
  c.som_epochs = 20;
  c.tsk_epochs = 10;
  c.max_rules = 3;
  return c;
}

}  // namespace

TEST_CASE("neuron growth law") {
  CHECK(next_neuron_count(20, 10, 1.01, 0.001, 0.5) == 21);
  CHECK(next_neuron_count(20, 7.5, 1.0, 0.0, 0.0) == 20);
  CHECK(next_neuron_count(20, 0, 0.8, 0.001, 0.5) == 17);
  CHECK(next_neuron_count(20, 0, 5.0, 0.0, 0.0, 10, 70) == 70);
  CHECK(next_neuron_count(20, 0, 0.1, 0.0, 0.0, 10, 70) == 10);
  CHECK(next_neuron_count(20, INFINITY, 1.0, 1.0, 0.0, 10, 70) == 70);

  // unrounded trajectory against the closed form
  const double a = 1.01, g = 0.5, n0 = 20;
  double n = n0;
  for (int t = 1; t <= 200; ++t) {
    n = grow_neurons(n, 0.0, a, 0.001, g);
    const double closed = std::pow(a, t) * n0 + g * (std::pow(a, t) - 1) / (a - 1);
    REQUIRE(std::abs(n - closed) <= 1e-9 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("grid dimensions") {
  auto d = grid_dims(63);
  CHECK(d.n1 == 7);
  CHECK(d.n2 == 9);
  d = grid_dims(16);
  CHECK(d.n1 == 4);
  CHECK(d.n2 == 4);
  d = grid_dims(13);
  CHECK(d.n1 == 1);
  CHECK(d.n2 == 13);
  CHECK(d.one_d);
  for (std::size_t n = 1; n <= 200; ++n) {
    const auto g = grid_dims(n);
    REQUIRE(g.n1 * g.n2 == n);
    REQUIRE(g.n1 <= g.n2);
    // exhaustive scan of factor pairs
    std::size_t best = 1;
    for (std::size_t a = 1; a <= n; ++a)
      if (n % a == 0 && a <= n / a) best = a;
    const bool fallback = static_cast<double>(n / best - best) > std::sqrt(static_cast<double>(n));
    REQUIRE(g.n1 == (fallback ? 1 : best));
  }
}

TEST_CASE("selection criteria and tie-breaks") {
  auto rec = [](std::size_t t, std::size_t n, std::size_t n1, std::size_t n2, std::size_t rules, double err,
                std::size_t granules) {
    IterationRecord x;
    x.t = t;
    x.neuron_count = n;
    x.n1 = n1;
    x.n2 = n2;
    x.rule_count = rules;
    x.test_error = err;
    x.granule_count = granules;
    return x;
  };
  std::vector<IterationRecord> r{rec(0, 10, 2, 5, 4, 0.5, 9), rec(1, 12, 3, 4, 3, 0.5, 9), rec(2, 14, 2, 7, 3, 0.5, 7),
                                 rec(3, 16, 4, 4, 2, 0.2, 8)};
  r[3].failed = true;
  r[3].test_error = INFINITY;
  CHECK(select_best(r, Criterion::min_error) == 2);
  CHECK(select_best(r, Criterion::min_rules) == 2);
  CHECK(select_best(r, Criterion::min_objects) == 2);
  r[2].test_error = 0.6;
  CHECK(select_best(r, Criterion::min_error) == 1);
  CHECK(select_best(r, Criterion::min_objects) == 2);
  r[1] = r[0];
  r[1].t = 1;
  CHECK(select_best(r, Criterion::min_error) == 0);
  CHECK_THROWS_AS(select_best({}, Criterion::min_error), Error);
}

TEST_CASE("durability") {
  CHECK(neuron_durability(trace_of({20, 20, 20, 20}), 0) == std::map<std::size_t, std::size_t>{{20, 4}});
  const auto alt = neuron_durability(trace_of({10, 30, 10, 30}), 1);
  CHECK(alt == std::map<std::size_t, std::size_t>{{10, 1}, {30, 1}});
  const auto ex = neuron_durability(trace_of({20, 20, 21, 35, 35, 35}), 1);
  CHECK(ex == std::map<std::size_t, std::size_t>{{20, 3}, {35, 3}});
}

TEST_CASE("balance hole") {
  SUBCASE("constant tail") {
    const auto t = trace_of({10, 20, 30, 40, 40, 40, 40}, {5, 4, 3, 2, 2, 2, 2});
    const auto h = detect_balance_hole(t, 4, 0, 0);
    REQUIRE(h);
    CHECK(h->start == 3);
    CHECK(h->neurons == 40);
  }
  SUBCASE("growing counts") {
    std::vector<std::size_t> c;
    for (std::size_t k = 0; k < 50; ++k) c.push_back(10 + 3 * k);
    CHECK(!detect_balance_hole(trace_of(c), 5, 1, 1));
  }
  SUBCASE("converging to about 50") {
    Rng rng(4);
    std::vector<std::size_t> c;
    std::vector<double> e;
    for (std::size_t k = 0; k < 160; ++k) {
      if (k < 100) {
        c.push_back(10 + k % 37 * 2);
        e.push_back(1.0 + 0.05 * static_cast<double>(k % 7));
      } else {
        c.push_back(static_cast<std::size_t>(48 + rng.integer(0, 4)));
        e.push_back(0.4 + rng.uniform(0, 0.1));
      }
    }
    const auto h = detect_balance_hole(trace_of(c, e), 20, 2, 0.1);
    REQUIRE(h);
    CHECK(h->start >= 90);
    CHECK(std::abs(h->neurons - 50) <= 2);
  }
}

TEST_CASE("run_sonfis small runs") {
  const auto train = smooth_table(120, 1);
  const auto test = smooth_table(30, 2);
  SUBCASE("one iteration") {
    auto c = quick_config(5);
    c.iterations = 1;
    const auto r = run_sonfis(train, test, c);
    CHECK(r.trace.records.size() == 1);
    CHECK(r.trace.best_index == 0);
  }
  SUBCASE("argmin, determinism and record invariants") {
    const auto c = quick_config(9);
    const auto r = run_sonfis(train, test, c);
    REQUIRE(r.trace.records.size() == 3);
    for (const auto& rec : r.trace.records) {
      CHECK(!rec.failed);
      CHECK(rec.neuron_count >= c.neuron_min);
      CHECK(rec.neuron_count <= c.neuron_max);
      CHECK(rec.n1 * rec.n2 == rec.neuron_count);
      CHECK(rec.rule_count >= 1);
      CHECK(rec.rule_count <= c.max_rules);
      CHECK(r.trace.records[r.trace.best_index].test_error <= rec.test_error);
    }
    const auto again = run_sonfis(train, test, c);
    CHECK(trace_to_csv(again.trace) == trace_to_csv(r.trace));
    CHECK(again.best_model == r.best_model);

    // the best model reproduces its recorded test error
    const auto x = test.numeric_matrix(test.condition_indices());
    const auto y = test.numeric_column(*test.decision_index());
    CHECK(rmse(nfis::infer_batch(r.best_model, x), y) == r.trace.records[r.trace.best_index].test_error);
  }
  SUBCASE("adaptive mode follows the growth law") {
    auto c = quick_config(3);
    c.mode = GrowthMode::adaptive;
    c.neuron_max = 40;
    c.initial_neurons = 6;
    const auto r = run_sonfis(train, test, c);
    REQUIRE(r.trace.records.size() == 3);
    CHECK(r.trace.records[0].neuron_count == 6);
    for (std::size_t t = 1; t < 3; ++t) {
      const auto& prev = r.trace.records[t - 1];
      CHECK(r.trace.records[t].neuron_count ==
            next_neuron_count(prev.neuron_count, prev.test_error, c.alpha, c.beta, c.gamma, c.neuron_min, c.neuron_max));
    }
  }
  SUBCASE("error target stops early") {
    auto c = quick_config(3);
    c.error_target = 1e9;
    CHECK(run_sonfis(train, test, c).trace.records.size() == 1);
  }
  SUBCASE("bad configs") {
    auto c = quick_config(1);
    c.neuron_min = 1;
    CHECK_THROWS_AS(run_sonfis(train, test, c), Error);
    c = quick_config(1);
    c.iterations = 0;
    CHECK_THROWS_AS(run_sonfis(train, test, c), Error);
  }
}

TEST_CASE("rule seeding hits the target count when reachable") {
  Rng rng(6);
  Matrix x;
  std::vector<double> y;
  for (int i = 0; i < 80; ++i) {
    const double a = rng.uniform(0, 1);
    x.append_row(std::vector<double>{a});
    y.push_back(std::sin(6 * a));
  }
  for (std::size_t target : {1u, 2u, 3u, 4u}) {
    const auto s = seed_rules(x, y, target, {});
    CHECK(s.centers.rows() == target);
    CHECK(s.radius > 0.0);
  }
}

TEST_CASE("trace csv") {
  auto t = trace_of({12, 15});
  t.records[0].n1 = 3;
  t.records[0].n2 = 4;
  t.records[0].rule_count = 2;
  t.records[0].test_error = 0.1;
  const auto csv = trace_to_csv(t);
  CHECK(csv.rfind("t,neurons,n1,n2,rules,rmse\n0,12,3,4,2,0.1\n", 0) == 0);
}
