#include "granular/som.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "granular/error.hpp"
#include "granular/kernels.hpp"
#include "granular/log.hpp"
#include "granular/random.hpp"

namespace granular::som {

double SomTopology::start_radius() const noexcept {
  if (initial_radius > 0.0) return initial_radius;
  return std::max(1.0, static_cast<double>(std::max(n1, n2)) / 2.0);
}

double SomTopology::end_radius() const noexcept { return std::min(final_radius, start_radius()); }

void SomTopology::validate() const {
  if (n1 < 1 || n2 < 1) throw Error(ErrorKind::configuration, "som: lattice dimensions must be >= 1");
  if (epochs < 1) throw Error(ErrorKind::configuration, "som: epochs must be >= 1");
  if (!(lr_final > 0.0) || lr_initial < lr_final)
    throw Error(ErrorKind::configuration, "som: need lr_initial >= lr_final > 0");
  if (initial_radius < 0.0 || !(final_radius > 0.0))
    throw Error(ErrorKind::configuration, "som: radii must be positive");
  if (!(ordering_fraction > 0.0) || ordering_fraction > 1.0)
    throw Error(ErrorKind::configuration, "som: ordering_fraction must lie in (0, 1]");
}

Matrix SomGrid::unit_prototypes() const { return scale.to_unit(prototypes); }

void SomGrid::validate() const {
  topology.validate();
  if (prototypes.rows() != topology.neurons())
    throw Error(ErrorKind::shape, "som: prototype count does not match lattice");
  if (feature_names.size() != prototypes.cols() || scale.min.size() != prototypes.cols() ||
      scale.range.size() != prototypes.cols())
    throw Error(ErrorKind::shape, "som: feature schema does not match prototypes");
  for (double v : prototypes.data())
    if (!std::isfinite(v)) throw Error(ErrorKind::shape, "som: non-finite prototype entry");
}

namespace {

void check_data(const Matrix& data) {
  if (data.empty() || data.cols() == 0) throw Error(ErrorKind::training, "som: empty training data");
}

std::vector<std::string> default_names(std::size_t n, std::vector<std::string> names) {
  if (names.empty()) {
    for (std::size_t j = 0; j < n; ++j) names.push_back("f" + std::to_string(j));
  }
  if (names.size() != n) throw Error(ErrorKind::shape, "som: feature name count mismatch");
  return names;
}

// Squared lattice distance between neurons a and b on an n1 x n2 grid.
double lattice_distance2(std::size_t a, std::size_t b, std::size_t n2) {
  const double r = static_cast<double>(a / n2) - static_cast<double>(b / n2);
  const double c = static_cast<double>(a % n2) - static_cast<double>(b % n2);
  return r * r + c * c;
}

}  // namespace

SomGrid initialize_som(const Matrix& data, const SomTopology& topology, std::vector<std::string> feature_names) {
  topology.validate();
  check_data(data);
  SomGrid grid;
  grid.topology = topology;
  grid.feature_names = default_names(data.cols(), std::move(feature_names));
  grid.scale = FeatureScale::fit(data);
  // A constant column has unit range by convention but a degenerate box.
  std::vector<double> width(data.cols());
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double lo = data(0, j), hi = data(0, j);
    for (std::size_t i = 1; i < data.rows(); ++i) {
      lo = std::min(lo, data(i, j));
      hi = std::max(hi, data(i, j));
    }
    width[j] = hi - lo;
  }
  Rng rng(topology.seed);
  grid.prototypes = Matrix(topology.neurons(), data.cols());
  for (std::size_t k = 0; k < topology.neurons(); ++k)
    for (std::size_t j = 0; j < data.cols(); ++j)
      grid.prototypes(k, j) = grid.scale.min[j] + rng.uniform() * width[j];
  return grid;
}

SomGrid train_som(const Matrix& data, const SomTopology& topology, std::vector<std::string> feature_names) {
  return train_som(data, initialize_som(data, topology, std::move(feature_names)));
}

SomGrid train_som(const Matrix& data, SomGrid grid) {
  check_data(data);
  const auto& topo = grid.topology;
  topo.validate();
  if (data.cols() != grid.features()) throw Error(ErrorKind::shape, "som: data dimension mismatch");

  const Matrix unit = grid.scale.to_unit(data);
  Matrix weights = grid.unit_prototypes();
  const std::size_t neurons = weights.rows();
  const std::size_t dims = weights.cols();
  const std::size_t n = unit.rows();
  const double r0 = topo.start_radius();
  const double r1 = topo.end_radius();
  const double total = static_cast<double>(topo.epochs * n);

  Rng rng(derive_seed(topo.seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> h(neurons);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < topo.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (auto idx : order) {
      const double frac = total > 1.0 ? static_cast<double>(step) / (total - 1.0) : 1.0;
      ++step;
      const double lr = topo.lr_initial + (topo.lr_final - topo.lr_initial) * frac;
      const double radius = r0 + (r1 - r0) * std::min(1.0, frac / topo.ordering_fraction);
      const auto x = unit.row(idx);
      const std::size_t winner = kernels::nearest_prototype(x, weights);
      for (std::size_t k = 0; k < neurons; ++k) {
        const double d2 = lattice_distance2(winner, k, topo.n2);
        // Neighborhood set: lattice distance strictly inside the radius, so a
        // radius of 1 leaves the winner alone.
        if (k != winner && d2 >= radius * radius)
          h[k] = 0.0;
        else
          h[k] = topo.neighborhood == Neighborhood::gaussian ? std::exp(-d2 / (2.0 * radius * radius)) : 1.0;
      }
      for (std::size_t k = 0; k < neurons; ++k) {
        const double g = lr * h[k];
        if (g < 1e-300) continue;
        auto w = weights.row(k);
        for (std::size_t j = 0; j < dims; ++j) w[j] += g * (x[j] - w[j]);
      }
    }
  }
  for (std::size_t k = 0; k < neurons; ++k)
    for (std::size_t j = 0; j < dims; ++j) grid.prototypes(k, j) = grid.scale.from_unit(j, weights(k, j));
  return grid;
}

std::size_t best_matching_unit(const SomGrid& grid, std::span<const double> vector) {
  if (vector.size() != grid.features())
    throw Error(ErrorKind::shape, "som: vector has " + std::to_string(vector.size()) + " features, grid has " +
                                      std::to_string(grid.features()));
  std::vector<double> unit(vector.size());
  for (std::size_t j = 0; j < vector.size(); ++j) unit[j] = grid.scale.to_unit(j, vector[j]);
  return kernels::nearest_prototype(unit, grid.unit_prototypes());
}

double quantization_error(const SomGrid& grid, const Matrix& data) {
  if (data.empty()) throw Error(ErrorKind::measure, "som: quantization error of empty data");
  if (data.cols() != grid.features()) throw Error(ErrorKind::shape, "som: data dimension mismatch");
  const Matrix unit = grid.scale.to_unit(data);
  const Matrix protos = grid.unit_prototypes();
  const auto bmu = kernels::nearest_prototypes(unit, protos);
  double sum = 0.0;
  for (std::size_t i = 0; i < unit.rows(); ++i) sum += std::sqrt(squared_distance(unit.row(i), protos.row(bmu[i])));
  return sum / static_cast<double>(unit.rows());
}

GranuleSet crisp_granulate(const SomGrid& grid, const DecisionTable& data) {
  const auto& attrs = data.attributes();
  if (attrs.size() != grid.features())
    throw Error(ErrorKind::shape, "som: table has " + std::to_string(attrs.size()) + " attributes, grid has " +
                                      std::to_string(grid.features()));
  for (std::size_t j = 0; j < attrs.size(); ++j)
    if (attrs[j].name != grid.feature_names[j])
      throw Error(ErrorKind::shape, "som: attribute '" + attrs[j].name + "' does not match grid feature '" +
                                        grid.feature_names[j] + "'");
  const Matrix values = data.numeric_matrix();
  const auto assignment = kernels::nearest_prototypes(grid.scale.to_unit(values), grid.unit_prototypes());

  std::vector<std::size_t> occupancy(grid.neurons(), 0);
  for (auto k : assignment) ++occupancy[k];

  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::size_t> granule_neuron;
  for (std::size_t k = 0; k < grid.neurons(); ++k) {
    if (occupancy[k] == 0) continue;
    ids.push_back("n" + std::to_string(k));
    std::vector<Cell> row;
    for (std::size_t j = 0; j < grid.features(); ++j) row.emplace_back(grid.prototypes(k, j));
    rows.push_back(std::move(row));
    granule_neuron.push_back(k);
  }
  return GranuleSet{DecisionTable(std::move(ids), attrs, std::move(rows)), assignment, std::move(occupancy),
                    std::move(granule_neuron)};
}

int apply_level_map(std::span<const double> level_map, double value) {
  std::size_t best = 0;
  double best_d = std::abs(value - level_map[0]);
  for (std::size_t k = 1; k < level_map.size(); ++k) {
    const double d = std::abs(value - level_map[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return static_cast<int>(best) + 1;
}

Discretization discretize_attribute(std::span<const double> values, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::configuration, "discretize: level count must be >= 1");
  if (values.empty()) throw Error(ErrorKind::training, "discretize: empty values");

  Matrix data(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) data(i, 0) = values[i];
  SomTopology topo;
  topo.n1 = k;
  topo.n2 = 1;
  topo.epochs = 200;
  topo.lr_initial = 0.5;
  topo.lr_final = 0.01;
  topo.seed = seed;
  const SomGrid grid = train_som(data, topo);

  // Effective levels: distinct prototypes of neurons that win some value.
  const auto winners = kernels::nearest_prototypes_serial(grid.scale.to_unit(data), grid.unit_prototypes());
  std::vector<double> used;
  for (auto w : winners) used.push_back(grid.prototypes(w, 0));
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  Discretization out;
  out.requested = k;
  out.level_map = used;
  out.degenerate = used.size() < k;
  if (out.degenerate)
    log(LogLevel::warning, "discretize: requested " + std::to_string(k) + " levels, " +
                               std::to_string(used.size()) + " effective");
  out.levels.reserve(values.size());
  for (double v : values) out.levels.push_back(apply_level_map(out.level_map, v));
  return out;
}

}  // namespace granular::som
