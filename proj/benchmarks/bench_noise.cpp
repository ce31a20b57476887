#include <benchmark/benchmark.h>

#include "qacoustic/bath.hpp"
#include "qacoustic/noise.hpp"

using namespace qacoustic;

namespace {

// Filter construction and one draw for the desk copper bath; args: box length (0.1 nm), steps.
void BM_FilterBuild(benchmark::State& state) {
  const ModeSet modes = enumerate_modes(material_preset("copper"), state.range(0) / 10.0,
                                        derive_parameters(material_preset("copper")).q_D);
  for (auto _ : state) {
    NoiseGenerator gen(modes, 0.005, static_cast<int>(state.range(1)));
    benchmark::DoNotOptimize(gen.filter_count());
  }
  state.counters["modes"] = static_cast<double>(modes.size());
}
BENCHMARK(BM_FilterBuild)->Args({64, 512})->Args({64, 2048})->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const ModeSet modes = enumerate_modes(material_preset("copper"), state.range(0) / 10.0,
                                        derive_parameters(material_preset("copper")).q_D);
  const NoiseGenerator gen(modes, 0.005, static_cast<int>(state.range(1)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen.generate(seed++).raw().data());
  state.SetItemsProcessed(state.iterations() * state.range(1) * modes.size());
}
BENCHMARK(BM_Generate)
    ->Args({32, 512})
    ->Args({64, 512})
    ->Args({64, 1024})
    ->Args({64, 2048})
    ->Unit(benchmark::kMillisecond);

// Single-mode generator as used by the covariance check.
void BM_GenerateSingleMode(benchmark::State& state) {
  const double omega = 0.02585;
  const NoiseGenerator gen(omega, 2 * 3.141592653589793 / (64 * omega), 256);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen.generate(seed++).raw().data());
}
BENCHMARK(BM_GenerateSingleMode)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
