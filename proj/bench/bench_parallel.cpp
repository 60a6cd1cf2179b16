// Serial reference (jobs = 1) against the OpenMP parameter-point loops.
// Run with --benchmark_counters_tabular=true to compare jobs side by side.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>

#include "rectdirac/cli.hpp"
#include "rectdirac/jopt.hpp"
#include "rectdirac/parallel.hpp"
#include "rectdirac/symmetry.hpp"

using namespace rectdirac;

namespace {

const FormMatrices& fm(int n) {
  static std::map<int, FormMatrices> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, assemble(Grid(n))).first;
  }
  return it->second;
}

std::vector<long> job_counts() { return {1, std::max(2, default_jobs())}; }

void BM_sweep(benchmark::State& state) {
  cli::SweepConfig c;
  c.n = static_cast<int>(state.range(0));
  c.steps = 9;
  c.m = 1.0;
  const int jobs = static_cast<int>(state.range(1));
  const FormMatrices& f = fm(c.n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cli::run_sweep(c, f, jobs, nullptr));
  }
  state.counters["jobs"] = jobs;
  state.counters["points/s"] = benchmark::Counter(c.steps, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_restarts(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(1));
  const FormMatrices& f = fm(static_cast<int>(state.range(0)));
  jopt::FixedPointOptions o;
  o.maxit = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(jopt::probe_conjecture_symmetry(f, 0.0, 4, 3, o, jobs));
  }
  state.counters["jobs"] = jobs;
}

void BM_commutation(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(1));
  const FormMatrices& f = fm(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(commutation_check(f, 1.3, 0.7, 1.0, 1, 16, 7, jobs));
  }
  state.counters["jobs"] = jobs;
}

void args(benchmark::internal::Benchmark* b) {
  for (long n : {16, 32}) {
    for (long j : job_counts()) {
      b->Args({n, j});
    }
  }
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_sweep)->Apply(args);
BENCHMARK(BM_restarts)->Apply(args);
BENCHMARK(BM_commutation)->Apply(args);

BENCHMARK_MAIN();
