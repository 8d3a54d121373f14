// Serial reference vs OpenMP for the heavy kernels. Arg 0 = serial,
// 1 = parallel; set OMP_NUM_THREADS to vary the team.

#include <benchmark/benchmark.h>

#include <random>

#include "sqg/common/exec.hpp"
#include "sqg/multilinear/chain.hpp"
#include "sqg/multilinear/form.hpp"
#include "sqg/resonance/resonance.hpp"
#include "sqg/spectral/field.hpp"

using namespace sqg;

namespace {

Exec mode(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

spectral::SpectralField field(int m, int n_max) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  spectral::SpectralField f(m, n_max);
  for (auto& z : f.packed()) z = {g(rng), g(rng)};
  return f;
}

void BM_Evaluate6(benchmark::State& st) {
  const auto M3 = multilinear::build_M3(3.0, 3, 24);
  const auto M6 = multilinear::nonlinear_insertion(
      multilinear::nonlinear_insertion(multilinear::nonlinear_insertion(multilinear::L(M3))));
  const auto f = field(3, 24);
  for (auto _ : st) benchmark::DoNotOptimize(multilinear::evaluate_diagonal(M6, f, mode(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(M6.space().size()));
}
BENCHMARK(BM_Evaluate6)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Symmetrize5(benchmark::State& st) {
  const auto M3 = multilinear::build_M3(3.0, 3, 24);
  const auto M5 = multilinear::nonlinear_insertion(multilinear::nonlinear_insertion(multilinear::L(M3)));
  for (auto _ : st) benchmark::DoNotOptimize(multilinear::symmetrize(M5, mode(st)));
}
BENCHMARK(BM_Symmetrize5)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Insertion(benchmark::State& st) {
  const auto M4 = multilinear::nonlinear_insertion(multilinear::L(multilinear::build_M3(3.0, 3, 24)));
  const auto M4p = multilinear::L(M4 - multilinear::P(M4));
  for (auto _ : st) benchmark::DoNotOptimize(multilinear::nonlinear_insertion(M4p, mode(st)));
}
BENCHMARK(BM_Insertion)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ResonanceSearch4(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(resonance::search(4, 60, mode(st)));
}
BENCHMARK(BM_ResonanceSearch4)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ResonanceSearch6(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(resonance::search_resonances_p6(20, mode(st)));
}
BENCHMARK(BM_ResonanceSearch6)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
