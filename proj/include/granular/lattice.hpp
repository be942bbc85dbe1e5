#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace granular::lattice {

struct AxisSpec {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::size_t count() const;
  double coordinate(std::size_t i) const { return min + static_cast<double>(i) * step; }
  void validate() const;
  bool operator==(const AxisSpec&) const = default;
};

/// Parses "name:min:max:step".
AxisSpec parse_axis(std::string_view text);

/// Scalar field over a regular grid of up to three axes. Values are stored
/// row-major with the last axis varying fastest.
struct PredictionLattice {
  std::vector<AxisSpec> axes;
  std::vector<double> values;

  std::size_t node_count() const;
  std::vector<double> node(std::size_t flat) const;
  void validate() const;
};

using Field = std::function<double(std::span<const double>)>;

/// Evaluates `field` at every node (OpenMP); `field` must be thread-safe.
PredictionLattice evaluate(std::vector<AxisSpec> axes, const Field& field);
PredictionLattice evaluate_serial(std::vector<AxisSpec> axes, const Field& field);

/// Divergence of the gradient of the field. Derivatives are central in the
/// interior and second-order one-sided at the boundary, so quadratics are
/// reproduced exactly. Axes with a single node are inactive; every active
/// axis needs at least three nodes.
PredictionLattice divergence(const PredictionLattice& lattice);

/// Header comment lines "# axis name min max step", then a column row and
/// one row per node.
std::string to_csv(const PredictionLattice& lattice, std::string_view value_name = "value");
PredictionLattice from_csv(std::string_view text);

}  // namespace granular::lattice
