#include <benchmark/benchmark.h>

#include "microlaser/hbt.hpp"
#include "microlaser/qmt.hpp"
#include "microlaser/qts.hpp"

using namespace microlaser;

static void BM_SteadyState(benchmark::State& state)
{
    auto const params = MicrolaserParams{}.with_mean_atom_number(static_cast<double>(state.range(0)));
    auto const dist = VelocityDistribution::from_params(params);
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(steady_state_distribution(params, dist));
    }
}
BENCHMARK(BM_SteadyState)->Arg(50)->Arg(220)->Arg(900)->Unit(benchmark::kMillisecond);

static void BM_OperatingPoint(benchmark::State& state)
{
    MicrolaserParams const params;
    auto const dist = VelocityDistribution::from_params(params);
    OperatingPointSolver solver(params, dist);
    double atoms = 100;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(solver.solve_mean_atom_number(atoms));
        atoms = atoms > 1200 ? 100 : atoms + 7;
    }
}
BENCHMARK(BM_OperatingPoint)->Unit(benchmark::kMicrosecond);

static void BM_Trajectory(benchmark::State& state)
{
    auto cfg = make_trajectory_config(10, 2.0, 0.05, 0.0, 200, 10, 7);
    cfg.max_simultaneous_atoms = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state)
    {
        cfg.seed = seed++;
        benchmark::DoNotOptimize(run_trajectory(cfg));
    }
    state.SetLabel("200 / gamma_c per iteration");
}
BENCHMARK(BM_Trajectory)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_Correlate(benchmark::State& state)
{
    Rng rng(3);
    auto const a = poisson_stream(1e6, 0.05, rng, 1);
    auto const b = poisson_stream(1e6, 0.05, rng, 2);
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(correlate(a, b, 2e-8, 4e-6));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.times.size()));
}
BENCHMARK(BM_Correlate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
