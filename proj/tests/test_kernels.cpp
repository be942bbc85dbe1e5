#include "doctest.h"
#include "granular/kernels.hpp"
#include "granular/random.hpp"
#include "oracles.hpp"

using namespace granular;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("parallel nearest prototypes equal the serial twin and the scan oracle") {
  Rng rng(3);
  const auto points = random_matrix(rng, 2000, 4);
  const auto protos = random_matrix(rng, 37, 4);
  const auto par = kernels::nearest_prototypes(points, protos);
  const auto ser = kernels::nearest_prototypes_serial(points, protos);
  CHECK(par == ser);
  for (std::size_t i = 0; i < points.rows(); ++i) REQUIRE(par[i] == oracle::nearest_row(protos, points.row(i)));
}

TEST_CASE("nearest prototype tie goes to the lowest index") {
  Matrix protos(6, 1);
  for (std::size_t k = 0; k < 6; ++k) protos(k, 0) = 10.0 + static_cast<double>(k);
  protos(2, 0) = -1.0;
  protos(5, 0) = 1.0;
  const std::vector<double> x{0.0};
  CHECK(kernels::nearest_prototype(x, protos) == 2);
}

TEST_CASE("density potentials: parallel equals serial equals direct sum") {
  Rng rng(4);
  const auto points = random_matrix(rng, 300, 3);
  const auto par = kernels::density_potentials(points, 16.0);
  const auto ser = kernels::density_potentials_serial(points, 16.0);
  CHECK(par == ser);
  for (std::size_t i = 0; i < points.rows(); i += 37) {
    double p = 0.0;
    for (std::size_t j = 0; j < points.rows(); ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < 3; ++c) d += (points(i, c) - points(j, c)) * (points(i, c) - points(j, c));
      p += std::exp(-16.0 * d);
    }
    CHECK(par[i] == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("map_rows parallel equals serial") {
  Rng rng(5);
  const auto points = random_matrix(rng, 1000, 2);
  const kernels::RowFunction f = [](std::span<const double> r) { return std::sin(r[0]) * r[1]; };
  CHECK(kernels::map_rows(points, f) == kernels::map_rows_serial(points, f));
  CHECK(kernels::thread_count() >= 1);
}
