#include "granular/kernels.hpp"

#include <cmath>
#include <limits>

#include <omp.h>

namespace granular::kernels {

std::size_t nearest_prototype(std::span<const double> point, const Matrix& prototypes) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prototypes.rows(); ++k) {
    const double d = squared_distance(point, prototypes.row(k));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> nearest_prototypes(const Matrix& points, const Matrix& prototypes) {
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
  std::vector<std::size_t> out(points.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = nearest_prototype(points.row(i), prototypes);
  return out;
}

std::vector<std::size_t> nearest_prototypes_serial(const Matrix& points, const Matrix& prototypes) {
  std::vector<std::size_t> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) out[i] = nearest_prototype(points.row(i), prototypes);
  return out;
}

namespace {

double potential_of(const Matrix& points, std::size_t i, double alpha) {
  double p = 0.0;
  for (std::size_t j = 0; j < points.rows(); ++j) p += std::exp(-alpha * squared_distance(points.row(i), points.row(j)));
  return p;
}

}  // namespace

std::vector<double> density_potentials(const Matrix& points, double alpha) {
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
  std::vector<double> out(points.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = potential_of(points, static_cast<std::size_t>(i), alpha);
  return out;
}

std::vector<double> density_potentials_serial(const Matrix& points, double alpha) {
  std::vector<double> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) out[i] = potential_of(points, i, alpha);
  return out;
}

std::vector<double> map_rows(const Matrix& points, const RowFunction& fn) {
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
  std::vector<double> out(points.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = fn(points.row(static_cast<std::size_t>(i)));
  return out;
}

std::vector<double> map_rows_serial(const Matrix& points, const RowFunction& fn) {
  std::vector<double> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) out[i] = fn(points.row(i));
  return out;
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace granular::kernels
