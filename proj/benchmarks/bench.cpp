#include <benchmark/benchmark.h>

#include "cataq/busy.hpp"
#include "cataq/sim.hpp"
#include "cataq/transient.hpp"

namespace {

cataq::ModelSpec mm_inf(double lambda, double mu, double nu) {
    return cataq::ModelSpec(
        {{cataq::RateFunction::constant(lambda),
          cataq::ServiceDistribution::exponential(mu),
          cataq::BatchLaw::single()}},
        cataq::RateFunction::constant(nu));
}

void BM_PgfJoint(benchmark::State& state) {
    auto spec = mm_inf(2.0, 1.0, 0.5);
    cataq::MarkVector marks{{0.4}, {0.9}};
    for (auto _ : state)
        benchmark::DoNotOptimize(cataq::pgf_joint(spec, 2.0, marks));
}
BENCHMARK(BM_PgfJoint);

void BM_StatePmf(benchmark::State& state) {
    auto spec = mm_inf(2.0, 1.0, 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(cataq::state_pmf(spec, 2.0, 24));
}
BENCHMARK(BM_StatePmf);

void BM_BusyLst(benchmark::State& state) {
    auto spec = mm_inf(1.0, 1.0, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(cataq::lst_busy_period(spec, 1.0));
}
BENCHMARK(BM_BusyLst);

void BM_SimulateTransient(benchmark::State& state) {
    cataq::SimConfig config{mm_inf(2.0, 1.0, 0.5), 2.0, {2.0}, 1000, 7, 0,
                            std::nullopt};
    for (auto _ : state)
        benchmark::DoNotOptimize(cataq::simulate_transient(config));
}
BENCHMARK(BM_SimulateTransient);

}  // namespace

BENCHMARK_MAIN();
