#include <benchmark/benchmark.h>

#include "qacoustic/propagator.hpp"

using namespace qacoustic;

namespace {

// One split step on an N x N grid (arg: N), box scaled to keep the spacing at 0.1 nm.
void BM_StrangStep(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const Grid2D g(N, 0.1 * N);
  const Fft2D fft(N);
  const MaterialParams cu = material_preset("copper");
  WavepacketPair p = init_gaussian(g, {0.05 * N, 0.05 * N}, {4.9, 0.0}, 0.4);
  const StepPlan plan = make_step_plan(g, mass_internal(cu), 0.005, 1);
  const Field V(g.size(), cplx(0.1, 0.01));
  for (auto _ : state) strang_step(p.plus, V, plan, fft);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_StrangStep)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Pseudopotential(benchmark::State& state) {
  const MaterialParams cu = material_preset("copper");
  const Grid2D g(64, 6.4);
  const Fft2D fft(64);
  const ModeSet modes = enumerate_modes(cu, 6.4, derive_parameters(cu).q_D);
  Rng rng(1);
  const auto amps = sample_thermal(modes, 350.0, SamplingScheme::RandomPhase, rng);
  const NoiseTrajectory noise = NoiseGenerator(modes, 0.005, 8).generate(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        assemble_pseudopotential(modes, amps, &noise, 3, 0.015, g, Branch::Plus, fft).data());
}
BENCHMARK(BM_Pseudopotential)->Unit(benchmark::kMicrosecond);

// A full desk realization: copper at its Debye temperature over 1 fs.
void BM_Realization(benchmark::State& state) {
  TrajectoryConfig c;
  c.material = material_preset("copper");
  c.N = 64;
  c.L = 6.4;
  c.sigma = 0.4;
  c.T_K = derive_parameters(c.material).T_D;
  c.noise_enabled = state.range(0) != 0;
  c.dt = recommended_dt(c);
  c.n_steps = static_cast<long>(1.0 / 0.6582119569 / c.dt) + 1;
  c.record_stride = 10;
  const TrajectoryRunner runner(c);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(runner.run(seed++).px.data());
  state.counters["steps"] = static_cast<double>(c.n_steps);
}
BENCHMARK(BM_Realization)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
