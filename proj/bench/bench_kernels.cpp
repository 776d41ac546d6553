// Serial reference vs OpenMP batch kernels on the triangle-union G*.
#include <benchmark/benchmark.h>

#include <vector>

#include "qrg/kernels.hpp"
#include "qrg/markov.hpp"

using namespace qrg;

namespace {

struct Fixture {
  TransitionKernel k;
  std::vector<double> rows, pi;
  int m = 0;
};

Fixture make_fixture(int n, int m) {
  Rng rng(1);
  StarGraph s = sample_star(make_triangle_union(n / 3), rng);
  Fixture f{srw_kernel(s.combined), {}, stationary(srw_kernel(s.combined), s.combined), m};
  f.rows.assign(static_cast<std::size_t>(m) * f.k.n, 0.0);
  for (int i = 0; i < m; ++i) f.rows[static_cast<std::size_t>(i) * f.k.n + (i * 7919) % f.k.n] = 1.0;
  // a few steps so rows are not one-hot
  std::vector<double> tmp(f.rows.size());
  for (int s2 = 0; s2 < 5; ++s2) {
    evolve_batch_serial(f.k, f.rows, tmp, m);
    f.rows.swap(tmp);
  }
  return f;
}

template <bool Parallel>
void BM_evolve(benchmark::State& state) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::vector<double> out(f.rows.size());
  for (auto _ : state) {
    if constexpr (Parallel) evolve_batch_parallel(f.k, f.rows, out, f.m);
    else evolve_batch_serial(f.k, f.rows, out, f.m);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * f.m * f.k.n);
}

template <bool Parallel>
void BM_tv(benchmark::State& state) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::vector<double> tv(f.m);
  for (auto _ : state) {
    if constexpr (Parallel) batch_tv_parallel(f.rows, f.pi, f.m, tv);
    else batch_tv_serial(f.rows, f.pi, f.m, tv);
    benchmark::DoNotOptimize(tv.data());
  }
  state.SetItemsProcessed(state.iterations() * f.m * f.k.n);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {768, 3072})
    for (int m : {64, 768}) b->Args({n, m});
}

}  // namespace

BENCHMARK(BM_evolve<false>)->Name("evolve/serial")->Apply(sizes);
BENCHMARK(BM_evolve<true>)->Name("evolve/parallel")->Apply(sizes);
BENCHMARK(BM_tv<false>)->Name("tv/serial")->Apply(sizes);
BENCHMARK(BM_tv<true>)->Name("tv/parallel")->Apply(sizes);

BENCHMARK_MAIN();
