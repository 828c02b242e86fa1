#include <benchmark/benchmark.h>

#include "chaosint/chaos_ops.hpp"
#include "chaosint/integral.hpp"
#include "chaosint/mc.hpp"
#include "chaosint/paths.hpp"

using namespace chaosint;

namespace {

SymTensor random_sym2(int n, std::uint64_t seed) {
  SymTensor f(2);
  std::uint64_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) f.set({i, j}, 2.0 * uniform01(seed, 0, idx++) - 1.0);
  return f;
}

void BM_regrade_square(benchmark::State& state) {
  const auto model = make_model(Family::parse("cexp"), 4);
  const SymTensor f = random_sym2(4, 3);
  const MultiPoly p = multiple_integral(f, model).to_poly();
  for (auto _ : state) {
    const GradedChaos z = regrade(p * p, model);
    benchmark::DoNotOptimize(z.constant());
  }
}
BENCHMARK(BM_regrade_square);

void BM_contract1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto model = make_model(Family::parse("cexp"), n);
  const SymTensor f = random_sym2(n, 5);
  for (auto _ : state) {
    const Kernel2 c = contract1(f, *model, n);
    benchmark::DoNotOptimize(c.at(0, 0));
  }
}
BENCHMARK(BM_contract1)->Arg(16)->Arg(64)->Arg(128);

void BM_double_integral(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const Grid grid(1.0, level);
  const BasisSpec basis(grid);
  const auto model = make_model(Family::parse("gaussian"), basis.size());
  IntegralSpec spec{StepFn::constant(grid, 1.0), StepFn::constant(grid, 1.0), 1.0, basis, model};
  for (auto _ : state) {
    const RawQuadratic z = double_integral_raw(spec);
    benchmark::DoNotOptimize(z.diag(0));
  }
}
BENCHMARK(BM_double_integral)->Arg(6)->Arg(8)->Arg(10);

void BM_fourth_moment_gap(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const Grid grid(1.0, level);
  const BasisSpec basis(grid);
  const auto model = make_model(Family::parse("cexp"), basis.size());
  const StepFn one = StepFn::constant(grid, 1.0);
  for (auto _ : state) {
    const GapMoment gm = fourth_moment_gap(one, one, 0.375, 0.625, basis, *model);
    benchmark::DoNotOptimize(gm.e4);
  }
}
BENCHMARK(BM_fourth_moment_gap)->Arg(8)->Arg(11);

void BM_qv_replicate(benchmark::State& state) {
  const Grid grid(1.0, 8);
  const BasisSpec basis(grid);
  const auto model = make_model(Family::parse("cexp"), basis.size());
  const StepFn one = StepFn::constant(grid, 1.0);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const Realization w = sample(*model, basis.size(), 1, rep++);
    benchmark::DoNotOptimize(qv_limit(one, one, 1.0, basis, *model, w));
  }
}
BENCHMARK(BM_qv_replicate);

void BM_sample_realization(benchmark::State& state) {
  const auto model = make_model(Family::parse("gaussian"), 256);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const Realization w = sample(*model, 256, 2, rep++);
    benchmark::DoNotOptimize(w.x[0]);
  }
}
BENCHMARK(BM_sample_realization);

}  // namespace

BENCHMARK_MAIN();
