// Serial against OpenMP assembly of the Newton residual and Jacobian rows on the unit disk.
// Arguments: grid intervals per unit length, then the thread count for the parallel variants.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include "blowup/field_solver.hpp"
#include "blowup/kernels.hpp"

using namespace blowup;

namespace {

struct Problem {
  StencilSet S;
  std::vector<double> u, psi;
};

const Problem& problem(int per_unit) {
  static std::map<int, Problem> cache;
  auto it = cache.find(per_unit);
  if (it != cache.end()) return it->second;
  Problem p;
  p.S = build_stencils(make_disk(Point2::Zero(), 1.0), 1.0 / per_unit);
  for (std::size_t k = 0; k < p.S.stencils.size(); ++k) {
    const Point2 x = p.S.grid.node(p.S.nodes[k].first, p.S.nodes[k].second);
    const double w = 0.5 * (1.0 - x.squaredNorm());
    p.u.push_back(1.0 / w);
    p.psi.push_back(w);
  }
  return cache.emplace(per_unit, std::move(p)).first->second;
}

template <bool Parallel>
void bm_assemble_u(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  if (Parallel) omp_set_num_threads(static_cast<int>(state.range(1)));
  std::vector<double> F;
  std::vector<JacobianRow> rows;
  for (auto _ : state) {
    if (Parallel) assemble_u_parallel(p.S.stencils, 3, p.u, F, rows);
    else assemble_u_serial(p.S.stencils, 3, p.u, F, rows);
    benchmark::DoNotOptimize(F.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.S.stencils.size()));
}

template <bool Parallel>
void bm_assemble_w(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  if (Parallel) omp_set_num_threads(static_cast<int>(state.range(1)));
  std::vector<double> F;
  std::vector<JacobianRow> rows;
  const ReferenceData none;
  for (auto _ : state) {
    if (Parallel) assemble_w_parallel(p.S.stencils, 3, none, p.psi, F, rows);
    else assemble_w_serial(p.S.stencils, 3, none, p.psi, F, rows);
    benchmark::DoNotOptimize(F.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.S.stencils.size()));
}

void serial_args(benchmark::internal::Benchmark* b) {
  for (int m : {100, 200, 400}) b->Args({m, 1});
}

void parallel_args(benchmark::internal::Benchmark* b) {
  const int most = omp_get_max_threads();
  for (int m : {100, 200, 400}) {
    for (int t = 1; t <= most; t *= 2) b->Args({m, t});
  }
}

}  // namespace

BENCHMARK(bm_assemble_u<false>)->Apply(serial_args)->UseRealTime();
BENCHMARK(bm_assemble_u<true>)->Apply(parallel_args)->UseRealTime();
BENCHMARK(bm_assemble_w<false>)->Apply(serial_args)->UseRealTime();
BENCHMARK(bm_assemble_w<true>)->Apply(parallel_args)->UseRealTime();

BENCHMARK_MAIN();
