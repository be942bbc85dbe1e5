#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "granular/data.hpp"
#include "granular/nfis.hpp"
#include "granular/som.hpp"

namespace granular::sonfis {

enum class GrowthMode { random, adaptive };
enum class Criterion { min_error, min_rules, min_objects };

struct SonfisConfig {
  std::size_t neuron_min = 10;
  std::size_t neuron_max = 70;
  std::size_t max_rules = 4;
  std::size_t iterations = 10;
  GrowthMode mode = GrowthMode::random;
  double alpha = 1.01;
  double beta = 0.001;
  double gamma = 0.5;
  /// Starting neuron count in adaptive mode; 0 means neuron_min.
  std::size_t initial_neurons = 0;
  /// Stop once a test RMSE at or below this is reached; negative disables.
  double error_target = -1.0;
  Criterion criterion = Criterion::min_error;
  std::uint64_t seed = 0;

  std::size_t som_epochs = 200;
  double som_lr_initial = 0.5;
  double som_lr_final = 0.01;
  nfis::SubtractiveConfig subtractive;
  std::size_t tsk_epochs = 100;
  double tsk_step = 0.01;

  void validate() const;
};

struct IterationRecord {
  std::size_t t = 0;
  std::size_t neuron_count = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t rule_count = 0;
  double test_error = 0.0;
  std::size_t granule_count = 0;
  /// Subtractive radius that produced the rule base.
  double radius = 0.0;
  bool failed = false;
  std::string failure;
};

struct GranulationTrace {
  std::vector<IterationRecord> records;
  std::size_t best_index = 0;
  Criterion criterion = Criterion::min_error;
};

struct SonfisResult {
  GranulationTrace trace;
  nfis::TskModel best_model;
  som::SomGrid best_grid;
};

/// Unrounded linear growth law: alpha * n + beta * error + gamma.
double grow_neurons(double n, double error, double alpha, double beta, double gamma);

/// Rounded growth law clamped to [min, max]. A non-finite result clamps to max.
std::size_t next_neuron_count(std::size_t n, double error, double alpha, double beta, double gamma,
                              std::size_t min = 1, std::size_t max = SIZE_MAX);

struct GridDims {
  std::size_t n1 = 1;
  std::size_t n2 = 1;
  bool one_d = false;
};

/// Most nearly square factorization n1 * n2 = n with n1 <= n2; near-prime n
/// (best difference above sqrt(n)) falls back to a 1 x n line.
GridDims grid_dims(std::size_t n);

/// Close-open balancing loop: SOM crisp granules at the current neuron count,
/// NFIS trained on the granule prototypes, RMSE on the untouched test set.
SonfisResult run_sonfis(const DecisionTable& train, const DecisionTable& test, const SonfisConfig& config);

/// Best record under the criterion. Ties: fewer rules, then fewer granules,
/// then earlier iteration. Failed records lose to any finite record.
std::size_t select_best(const std::vector<IterationRecord>& records, Criterion criterion);

/// Run-length of neuron counts: each run is anchored at its first count and
/// extends while counts stay within +-tolerance of the anchor. Maps each
/// anchor to its longest run.
std::map<std::size_t, std::size_t> neuron_durability(const GranulationTrace& trace, double tolerance);

struct BalanceHole {
  std::size_t start = 0;
  double neurons = 0.0;
  double error = 0.0;
};

/// Earliest window in which every neuron count lies within +-neuron_tol and
/// every error within +-error_tol of the window's midrange. Returns the
/// window centroid.
std::optional<BalanceHole> detect_balance_hole(const GranulationTrace& trace, std::size_t window,
                                               double neuron_tol, double error_tol);

/// Rows of t,neurons,n1,n2,rules,rmse.
std::string trace_to_csv(const GranulationTrace& trace);

const char* to_string(Criterion c);
Criterion parse_criterion(std::string_view s);
GrowthMode parse_growth_mode(std::string_view s);

/// Subtractive clustering tuned toward `target_rules` centers by bisecting the
/// radius; more centers than the target are cut to the strongest ones.
struct RuleSeeding {
  Matrix centers;
  double radius = 0.0;
};
RuleSeeding seed_rules(const Matrix& inputs, std::span<const double> targets, std::size_t target_rules,
                       const nfis::SubtractiveConfig& base);

}  // namespace granular::sonfis
