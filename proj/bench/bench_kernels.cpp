// Serial reference against the OpenMP path for the trial-parallel kernels.
// Arg 0 selects Execution::serial, arg 1 Execution::parallel.

#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "sysid/spatial.hpp"
#include "sysid/system_id.hpp"
#include "sysid/temporal.hpp"

using namespace sysid;

namespace {

Execution exec_of(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_LGSampled(benchmark::State& state) {
    const LGScenario s = LGScenario::precession(std::numbers::pi / 3.0, LGTimes{}, 20000);
    for (auto _ : state) benchmark::DoNotOptimize(lg_test(s, 1, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * 3 * 20000);
}

void BM_EprSampled(benchmark::State& state) {
    const BipartiteScenario s{QuantumState::singlet(), Angles::standard(), 20000};
    for (auto _ : state) benchmark::DoNotOptimize(run_epr_sampled(s, 1, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * 20000);
}

void BM_RefinementScan(benchmark::State& state) {
    const WorldModel world = WorldModel::zero_register(5, Operator::zero(32), 2.0);
    const std::vector<std::size_t> probes{1, 3, 5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(refinement_scan(world, probes, ThermoLedger(), 20, 1, exec_of(state)));
    }
}

void BM_ChshGridScan(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(chsh_grid_scan(QuantumState::singlet(), 24, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_LGSampled)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EprSampled)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RefinementScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChshGridScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
