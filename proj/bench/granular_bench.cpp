// Serial versus OpenMP kernels on the same inputs.

#include <benchmark/benchmark.h>

#include "granular/kernels.hpp"
#include "granular/lattice.hpp"
#include "granular/nfis.hpp"
#include "granular/random.hpp"
#include "granular/rst.hpp"
#include "granular/sorst.hpp"

using namespace granular;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform();
  return m;
}

template <bool Parallel>
void BM_NearestPrototypes(benchmark::State& state) {
  const auto points = random_matrix(static_cast<std::size_t>(state.range(0)), 5, 1);
  const auto protos = random_matrix(63, 5, 2);
  for (auto _ : state) {
    auto r = Parallel ? kernels::nearest_prototypes(points, protos) : kernels::nearest_prototypes_serial(points, protos);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_DensityPotentials(benchmark::State& state) {
  const auto points = random_matrix(static_cast<std::size_t>(state.range(0)), 4, 3);
  for (auto _ : state) {
    auto r = Parallel ? kernels::density_potentials(points, 16.0) : kernels::density_potentials_serial(points, 16.0);
    benchmark::DoNotOptimize(r.data());
  }
}

nfis::TskModel bench_model() {
  Rng rng(4);
  nfis::TskModel m;
  m.input_names = {"x", "y", "z"};
  for (int r = 0; r < 8; ++r) {
    nfis::TskRule rule;
    for (int j = 0; j < 3; ++j) {
      rule.premises.push_back({rng.uniform(), rng.uniform(0.1, 0.4)});
      rule.coefficients.push_back(rng.uniform(-1, 1));
    }
    rule.bias = rng.uniform();
    m.rules.push_back(rule);
  }
  return m;
}

template <bool Parallel>
void BM_InferBatch(benchmark::State& state) {
  const auto model = bench_model();
  const auto inputs = random_matrix(static_cast<std::size_t>(state.range(0)), 3, 5);
  for (auto _ : state) {
    auto r = Parallel ? nfis::infer_batch(model, inputs) : nfis::infer_batch_serial(model, inputs);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_LatticeEvaluate(benchmark::State& state) {
  const auto model = bench_model();
  const double step = 1.0 / static_cast<double>(state.range(0) - 1);
  const std::vector<lattice::AxisSpec> axes{{"x", 0, 1, step}, {"y", 0, 1, step}, {"z", 0, 1, step}};
  const lattice::Field f = [&](std::span<const double> p) { return nfis::infer(model, p); };
  for (auto _ : state) {
    auto l = Parallel ? lattice::evaluate(axes, f) : lattice::evaluate_serial(axes, f);
    benchmark::DoNotOptimize(l.values.data());
  }
}

template <bool Parallel>
void BM_DiscernibilityMatrix(benchmark::State& state) {
  Rng rng(6);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<int>> rows(n);
  std::vector<int> decisions(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 6; ++j) rows[i].push_back(static_cast<int>(rng.integer(1, 5)));
    decisions[i] = static_cast<int>(rng.integer(1, 5));
  }
  std::vector<rst::AttributeSchema> schema;
  for (int j = 0; j < 6; ++j) schema.push_back({"a" + std::to_string(j), {}});
  const rst::SymbolicTable table(schema, {"d", {}}, rows, decisions);
  for (auto _ : state) {
    auto m = Parallel ? rst::discernibility_matrix(table) : rst::discernibility_matrix_serial(table);
    benchmark::DoNotOptimize(&m);
  }
}

}  // namespace

BENCHMARK(BM_NearestPrototypes<false>)->Arg(600)->Arg(20000)->Name("nearest_prototypes/serial");
BENCHMARK(BM_NearestPrototypes<true>)->Arg(600)->Arg(20000)->Name("nearest_prototypes/omp");
BENCHMARK(BM_DensityPotentials<false>)->Arg(600)->Arg(3000)->Name("density_potentials/serial");
BENCHMARK(BM_DensityPotentials<true>)->Arg(600)->Arg(3000)->Name("density_potentials/omp");
BENCHMARK(BM_InferBatch<false>)->Arg(1000)->Arg(100000)->Name("infer_batch/serial");
BENCHMARK(BM_InferBatch<true>)->Arg(1000)->Arg(100000)->Name("infer_batch/omp");
BENCHMARK(BM_LatticeEvaluate<false>)->Arg(20)->Arg(50)->Name("lattice_evaluate/serial");
BENCHMARK(BM_LatticeEvaluate<true>)->Arg(20)->Arg(50)->Name("lattice_evaluate/omp");
BENCHMARK(BM_DiscernibilityMatrix<false>)->Arg(200)->Arg(1000)->Name("discernibility_matrix/serial");
BENCHMARK(BM_DiscernibilityMatrix<true>)->Arg(200)->Arg(1000)->Name("discernibility_matrix/omp");

BENCHMARK_MAIN();
