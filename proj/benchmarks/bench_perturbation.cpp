#include <benchmark/benchmark.h>

#include "qacoustic/perturbation.hpp"

using namespace qacoustic;

namespace {

// Full rate at T = f * T_D; arg is f in percent.
void BM_RateFull(benchmark::State& state) {
  const MaterialParams cu = material_preset("copper");
  const double T = derive_parameters(cu).T_D * state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(rate_full(cu, T).inv_tau_per_fs);
}
BENCHMARK(BM_RateFull)->Arg(20)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
