#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "granular/data.hpp"
#include "granular/matrix.hpp"

namespace granular::som {

enum class Neighborhood { gaussian, bubble };

/// Lattice shape and training schedule. n2 == 1 (or n1 == 1) is a 1-D map.
struct SomTopology {
  std::size_t n1 = 1;
  std::size_t n2 = 1;
  Neighborhood neighborhood = Neighborhood::gaussian;
  /// Starting lattice radius; 0 selects max(1, max(n1, n2) / 2).
  double initial_radius = 0.0;
  double final_radius = 1.0;
  /// Share of the steps spent shrinking the radius (ordering); the rest runs
  /// at final_radius, which at 1 leaves the winner alone (convergence).
  double ordering_fraction = 0.5;
  std::size_t epochs = 100;
  double lr_initial = 0.5;
  double lr_final = 0.01;
  std::uint64_t seed = 0;

  std::size_t neurons() const noexcept { return n1 * n2; }
  double start_radius() const noexcept;
  double end_radius() const noexcept;
  void validate() const;
};

/// Trained map. Prototypes are stored in data units; distances are taken in
/// the unit box defined by `scale`, the min-max box of the training data.
struct SomGrid {
  SomTopology topology;
  Matrix prototypes;
  std::vector<std::string> feature_names;
  FeatureScale scale;

  std::size_t neurons() const noexcept { return prototypes.rows(); }
  std::size_t features() const noexcept { return prototypes.cols(); }
  /// Prototypes mapped into the unit box.
  Matrix unit_prototypes() const;
  void validate() const;
};

/// Seeded uniform prototypes inside the data's min/max box.
SomGrid initialize_som(const Matrix& data, const SomTopology& topology,
                       std::vector<std::string> feature_names = {});

/// Winner-take-all online training: initialize, then refine.
SomGrid train_som(const Matrix& data, const SomTopology& topology,
                  std::vector<std::string> feature_names = {});

/// Continues training from the given grid's prototypes, scale and schedule.
SomGrid train_som(const Matrix& data, SomGrid grid);

/// Nearest prototype; ties go to the lowest index.
std::size_t best_matching_unit(const SomGrid& grid, std::span<const double> vector);

/// Mean distance from each row to its best-matching prototype (unit box).
double quantization_error(const SomGrid& grid, const Matrix& data);

struct GranuleSet {
  /// One object per occupied neuron, carrying that neuron's prototype.
  DecisionTable prototypes_table;
  std::vector<std::size_t> assignment;     // object -> neuron
  std::vector<std::size_t> occupancy;      // neuron -> object count
  std::vector<std::size_t> granule_neuron; // granule row -> neuron
};

/// Maps every object of `data` to its BMU and keeps occupied neurons only.
/// The grid must have been trained on all of `data`'s attributes, in order.
GranuleSet crisp_granulate(const SomGrid& grid, const DecisionTable& data);

struct Discretization {
  std::vector<int> levels;        // 1-based, ascending with value
  std::vector<double> level_map;  // level - 1 -> prototype value, ascending
  std::size_t requested = 0;
  bool degenerate = false;        // fewer effective levels than requested
};

/// 1-D SOM with k neurons on scalar values; levels relabeled by prototype order.
Discretization discretize_attribute(std::span<const double> values, std::size_t k, std::uint64_t seed);

/// Level (1-based) of the nearest level prototype; ties go to the lower level.
int apply_level_map(std::span<const double> level_map, double value);

/// Flat text artifact: header lines (dims, schedule, features, scale) and one
/// prototype per line at round-trip precision.
std::string export_grid(const SomGrid& grid);
SomGrid import_grid(std::string_view text);

}  // namespace granular::som
