#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a serial twin that is
// the reference implementation in tests; results must agree exactly because
// every output element is computed by the same per-element code.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "granular/matrix.hpp"

namespace granular::kernels {

/// Row index of the nearest prototype for each point; ties -> lowest index.
std::vector<std::size_t> nearest_prototypes(const Matrix& points, const Matrix& prototypes);
std::vector<std::size_t> nearest_prototypes_serial(const Matrix& points, const Matrix& prototypes);

std::size_t nearest_prototype(std::span<const double> point, const Matrix& prototypes);

/// Subtractive-clustering potentials: P_i = sum_j exp(-alpha * |x_i - x_j|^2).
std::vector<double> density_potentials(const Matrix& points, double alpha);
std::vector<double> density_potentials_serial(const Matrix& points, double alpha);

/// Applies `fn` to every row. `fn` must be safe to call concurrently.
using RowFunction = std::function<double(std::span<const double>)>;
std::vector<double> map_rows(const Matrix& points, const RowFunction& fn);
std::vector<double> map_rows_serial(const Matrix& points, const RowFunction& fn);

/// Number of OpenMP threads the parallel kernels will use.
int thread_count();

}  // namespace granular::kernels
