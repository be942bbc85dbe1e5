#include "granular/sonfis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "granular/error.hpp"
#include "granular/format.hpp"
#include "granular/log.hpp"
#include "granular/random.hpp"

namespace granular::sonfis {

void SonfisConfig::validate() const {
  if (neuron_min < 2) throw Error(ErrorKind::configuration, "sonfis: neuron range minimum must be >= 2");
  if (neuron_max < neuron_min) throw Error(ErrorKind::configuration, "sonfis: empty neuron range");
  if (max_rules < 1) throw Error(ErrorKind::configuration, "sonfis: max_rules must be >= 1");
  if (iterations < 1) throw Error(ErrorKind::configuration, "sonfis: iterations must be >= 1");
  if (mode == GrowthMode::adaptive && !(alpha > 0.0))
    throw Error(ErrorKind::configuration, "sonfis: alpha must be positive in adaptive mode");
  subtractive.validate();
}

double grow_neurons(double n, double error, double alpha, double beta, double gamma) {
  return alpha * n + beta * error + gamma;
}

std::size_t next_neuron_count(std::size_t n, double error, double alpha, double beta, double gamma, std::size_t min,
                              std::size_t max) {
  const double next = grow_neurons(static_cast<double>(n), error, alpha, beta, gamma);
  if (!std::isfinite(next) || next >= static_cast<double>(max)) {
    if (next > static_cast<double>(max)) log(LogLevel::debug, "sonfis: neuron count clamped to range maximum");
    return max;
  }
  const double rounded = std::round(next);
  if (rounded <= static_cast<double>(min)) {
    if (rounded < static_cast<double>(min)) log(LogLevel::debug, "sonfis: neuron count clamped to range minimum");
    return min;
  }
  return std::min(static_cast<std::size_t>(rounded), max);
}

GridDims grid_dims(std::size_t n) {
  if (n < 1) throw Error(ErrorKind::configuration, "grid_dims: neuron count must be >= 1");
  std::size_t best = 1;
  for (std::size_t a = 1; a * a <= n; ++a)
    if (n % a == 0) best = a;
  const std::size_t other = n / best;
  if (static_cast<double>(other - best) > std::sqrt(static_cast<double>(n))) return {1, n, true};
  return {best, other, best == 1};
}

RuleSeeding seed_rules(const Matrix& inputs, std::span<const double> targets, std::size_t target_rules,
                       const nfis::SubtractiveConfig& base) {
  Matrix joint(inputs.rows(), inputs.cols() + 1);
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    for (std::size_t j = 0; j < inputs.cols(); ++j) joint(i, j) = inputs(i, j);
    joint(i, inputs.cols()) = targets[i];
  }
  auto cluster = [&](double radius) {
    auto config = base;
    config.radius = radius;
    return nfis::subtractive_cluster(joint, config);
  };
  // Larger radius -> fewer centers. Keep the closest count not above target.
  double lo = 0.02, hi = 1.0;
  Matrix best = cluster(hi);
  double best_radius = hi;
  if (best.rows() < target_rules) {
    for (int it = 0; it < 40 && best.rows() != target_rules; ++it) {
      const double mid = 0.5 * (lo + hi);
      Matrix centers = cluster(mid);
      if (centers.rows() > target_rules) {
        lo = mid;
      } else {
        hi = mid;
        if (centers.rows() > best.rows()) {
          best = std::move(centers);
          best_radius = mid;
        }
      }
      if (hi - lo < 1e-6) break;
    }
  }
  Matrix out(std::min(best.rows(), target_rules), inputs.cols());
  for (std::size_t c = 0; c < out.rows(); ++c)
    for (std::size_t j = 0; j < inputs.cols(); ++j) out(c, j) = best(c, j);
  return {std::move(out), best_radius};
}

namespace {

void check_schemas(const DecisionTable& train, const DecisionTable& test) {
  if (train.attributes() != test.attributes())
    throw Error(ErrorKind::shape, "train and test tables have different schemas");
  if (!train.decision_index()) throw Error(ErrorKind::configuration, "table has no decision attribute");
  for (const auto& a : train.attributes())
    if (a.kind != Kind::numeric) throw Error(ErrorKind::shape, "attribute '" + a.name + "' is not numeric");
  if (train.size() == 0 || test.size() == 0) throw Error(ErrorKind::size, "train and test tables must be nonempty");
}

std::size_t draw_neurons(Rng& rng, const SonfisConfig& c) {
  return static_cast<std::size_t>(rng.integer(static_cast<long long>(c.neuron_min), static_cast<long long>(c.neuron_max)));
}

}  // namespace

std::size_t select_best(const std::vector<IterationRecord>& records, Criterion criterion) {
  if (records.empty()) throw Error(ErrorKind::size, "sonfis: empty trace");
  auto key = [criterion](const IterationRecord& r) {
    const double e = r.failed ? std::numeric_limits<double>::infinity() : r.test_error;
    const auto rules = static_cast<double>(r.rule_count);
    const auto granules = static_cast<double>(r.granule_count);
    switch (criterion) {
      case Criterion::min_rules: return std::make_tuple(r.failed, rules, e, granules);
      case Criterion::min_objects: return std::make_tuple(r.failed, granules, e, rules);
      case Criterion::min_error: break;
    }
    return std::make_tuple(r.failed, e, rules, granules);
  };
  std::size_t best = 0;
  for (std::size_t k = 1; k < records.size(); ++k)
    if (key(records[k]) < key(records[best])) best = k;
  return best;
}

SonfisResult run_sonfis(const DecisionTable& train, const DecisionTable& test, const SonfisConfig& config) {
  config.validate();
  check_schemas(train, test);
  const auto decision = *train.decision_index();
  const auto conditions = train.condition_indices();
  const Matrix train_all = train.numeric_matrix();
  const Matrix test_inputs = test.numeric_matrix(conditions);
  const auto test_targets = test.numeric_column(decision);
  std::vector<std::string> names;
  for (const auto& a : train.attributes()) names.push_back(a.name);

  Rng rng(config.seed);
  std::size_t neurons = config.mode == GrowthMode::random
                            ? draw_neurons(rng, config)
                            : std::clamp(config.initial_neurons ? config.initial_neurons : config.neuron_min,
                                         config.neuron_min, config.neuron_max);

  SonfisResult result;
  result.trace.criterion = config.criterion;
  std::vector<nfis::TskModel> models;
  std::vector<som::SomGrid> grids;
  for (std::size_t t = 0; t < config.iterations; ++t) {
    IterationRecord rec;
    rec.t = t;
    rec.neuron_count = neurons;
    const auto dims = grid_dims(neurons);
    rec.n1 = dims.n1;
    rec.n2 = dims.n2;
    nfis::TskModel model;
    som::SomGrid grid;
    try {
      som::SomTopology topo;
      topo.n1 = dims.n1;
      topo.n2 = dims.n2;
      topo.epochs = config.som_epochs;
      topo.lr_initial = config.som_lr_initial;
      topo.lr_final = config.som_lr_final;
      topo.seed = derive_seed(config.seed, 1000 + t);
      grid = som::train_som(train_all, topo, names);
      const auto granules = som::crisp_granulate(grid, train);
      const auto& g = granules.prototypes_table;
      rec.granule_count = g.size();
      const Matrix inputs = g.numeric_matrix(conditions);
      const auto targets = g.numeric_column(decision);
      const auto seeding = seed_rules(inputs, targets, config.max_rules, config.subtractive);
      rec.radius = seeding.radius;
      std::vector<std::string> input_names;
      for (auto j : conditions) input_names.push_back(names[j]);
      model = nfis::build_tsk_model(seeding.centers, inputs, targets, seeding.radius, input_names);
      model.output_name = names[decision];
      model = nfis::train_tsk(model, inputs, targets, {config.tsk_epochs, config.tsk_step}).model;
      rec.rule_count = model.rules.size();
      rec.test_error = rmse(nfis::infer_batch(model, test_inputs), test_targets);
      if (!std::isfinite(rec.test_error)) throw Error(ErrorKind::training, "non-finite test error");
    } catch (const Error& e) {
      rec.failed = true;
      rec.failure = e.what();
      rec.test_error = std::numeric_limits<double>::infinity();
      log(LogLevel::warning, "sonfis: iteration " + std::to_string(t) + " failed: " + e.what());
    }
    result.trace.records.push_back(rec);
    models.push_back(std::move(model));
    grids.push_back(std::move(grid));
    if (!rec.failed && rec.test_error <= config.error_target) break;
    neurons = config.mode == GrowthMode::random
                  ? draw_neurons(rng, config)
                  : next_neuron_count(neurons, rec.test_error, config.alpha, config.beta, config.gamma,
                                      config.neuron_min, config.neuron_max);
  }
  result.trace.best_index = select_best(result.trace.records, config.criterion);
  result.best_model = std::move(models[result.trace.best_index]);
  result.best_grid = std::move(grids[result.trace.best_index]);
  return result;
}

std::map<std::size_t, std::size_t> neuron_durability(const GranulationTrace& trace, double tolerance) {
  std::map<std::size_t, std::size_t> out;
  const auto& r = trace.records;
  std::size_t start = 0;
  while (start < r.size()) {
    const double anchor = static_cast<double>(r[start].neuron_count);
    std::size_t end = start + 1;
    while (end < r.size() && std::abs(static_cast<double>(r[end].neuron_count) - anchor) <= tolerance) ++end;
    auto& best = out[r[start].neuron_count];
    best = std::max(best, end - start);
    start = end;
  }
  return out;
}

std::optional<BalanceHole> detect_balance_hole(const GranulationTrace& trace, std::size_t window, double neuron_tol,
                                               double error_tol) {
  const auto& r = trace.records;
  if (window == 0 || window > r.size()) return std::nullopt;
  for (std::size_t s = 0; s + window <= r.size(); ++s) {
    double nmin = HUGE_VAL, nmax = -HUGE_VAL, emin = HUGE_VAL, emax = -HUGE_VAL, nsum = 0.0, esum = 0.0;
    for (std::size_t k = s; k < s + window; ++k) {
      const double n = static_cast<double>(r[k].neuron_count);
      const double e = r[k].test_error;
      nmin = std::min(nmin, n);
      nmax = std::max(nmax, n);
      emin = std::min(emin, e);
      emax = std::max(emax, e);
      nsum += n;
      esum += e;
    }
    if (!std::isfinite(emax)) continue;
    if (nmax - nmin <= 2.0 * neuron_tol && emax - emin <= 2.0 * error_tol)
      return BalanceHole{s, nsum / static_cast<double>(window), esum / static_cast<double>(window)};
  }
  return std::nullopt;
}

std::string trace_to_csv(const GranulationTrace& trace) {
  std::string out = "t,neurons,n1,n2,rules,rmse\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.t) + "," + std::to_string(r.neuron_count) + "," + std::to_string(r.n1) + "," +
           std::to_string(r.n2) + "," + std::to_string(r.rule_count) + "," + format_double(r.test_error) + "\n";
  }
  return out;
}

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::min_error: return "min_error";
    case Criterion::min_rules: return "min_rules";
    case Criterion::min_objects: return "min_objects";
  }
  return "min_error";
}

Criterion parse_criterion(std::string_view s) {
  if (s == "min_error") return Criterion::min_error;
  if (s == "min_rules") return Criterion::min_rules;
  if (s == "min_objects") return Criterion::min_objects;
  throw Error(ErrorKind::configuration, "unknown selection criterion '" + std::string(s) + "'");
}

GrowthMode parse_growth_mode(std::string_view s) {
  if (s == "random") return GrowthMode::random;
  if (s == "adaptive") return GrowthMode::adaptive;
  throw Error(ErrorKind::configuration, "unknown growth mode '" + std::string(s) + "'");
}

}  // namespace granular::sonfis
