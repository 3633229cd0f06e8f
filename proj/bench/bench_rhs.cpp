// Serial reference kernels against the OpenMP path, plus the three lift
// strategies, on the n=4 cube mesh (384 elements).

#include "bbdg/dg_solver.hpp"
#include "bbdg/mesh.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace bbdg;

namespace {

const Mesh& bench_mesh() {
  static const Mesh mesh = build_cube_mesh(4);
  return mesh;
}

template <typename Real>
void bm_rhs(benchmark::State& state, Basis basis, LiftMode lift, Exec exec) {
  const int n = static_cast<int>(state.range(0));
  const auto& mesh = bench_mesh();
  const auto disc = make_discretization<Real>(mesh, n, basis, Materials::uniform(mesh.num_elements()), lift);
  auto q = zero_state<Real>(n, mesh.num_elements(), basis);
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : q.data) v = static_cast<Real>(dist(gen));
  auto out = zero_state<Real>(n, mesh.num_elements(), basis);
  for (auto _ : state) {
    rhs(disc, q, out, exec);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.counters["dofs"] = static_cast<double>(q.data.size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.data.size()));
}

void bm_rhs_f64(benchmark::State& state, Basis basis, LiftMode lift, Exec exec) {
  bm_rhs<double>(state, basis, lift, exec);
}

void bm_rhs_f32(benchmark::State& state, Basis basis, LiftMode lift, Exec exec) {
  bm_rhs<float>(state, basis, lift, exec);
}

}  // namespace

BENCHMARK_CAPTURE(bm_rhs_f64, bernstein_serial, Basis::bernstein, LiftMode::optimal, Exec::serial)
    ->DenseRange(1, 9, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_rhs_f64, bernstein_omp, Basis::bernstein, LiftMode::optimal, Exec::parallel)
    ->DenseRange(1, 9, 2)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK_CAPTURE(bm_rhs_f64, nodal_serial, Basis::nodal, LiftMode::dense, Exec::serial)
    ->DenseRange(1, 9, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_rhs_f64, nodal_omp, Basis::nodal, LiftMode::dense, Exec::parallel)
    ->DenseRange(1, 9, 2)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_CAPTURE(bm_rhs_f64, lift_dense, Basis::bernstein, LiftMode::dense, Exec::serial)
    ->DenseRange(3, 9, 3)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_rhs_f64, lift_factorized, Basis::bernstein, LiftMode::factorized, Exec::serial)
    ->DenseRange(3, 9, 3)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_rhs_f64, lift_optimal, Basis::bernstein, LiftMode::optimal, Exec::serial)
    ->DenseRange(3, 9, 3)->Unit(benchmark::kMicrosecond);

BENCHMARK_CAPTURE(bm_rhs_f32, bernstein_serial_f32, Basis::bernstein, LiftMode::optimal, Exec::serial)
    ->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_rhs_f32, bernstein_omp_f32, Basis::bernstein, LiftMode::optimal, Exec::parallel)
    ->Arg(5)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
