// Cached vs reference heat-bath kernel, and the OpenMP instance loop vs the serial one.

#include <benchmark/benchmark.h>

#include "sw/model.hpp"
#include "sw/prior.hpp"
#include "sw/sampler.hpp"

namespace {

void sweep_bench(benchmark::State& state, sw::Kernel kernel) {
    const sw::Prior p = sw::rademacher();
    const int N = static_cast<int>(state.range(0));
    const sw::Instance inst = sw::sample_instance(p, N, 1.5, 0.0, 1.0, 0.0, 7);
    const sw::Couplings c(inst);
    sw::ChainSpec spec;
    sw::HeatBath hb(c, p, sw::initial_configuration(inst, p, spec, 0), sw::chain_stream(inst, spec, 0), kernel);
    for (auto _ : state) {
        hb.sweep();
        benchmark::DoNotOptimize(hb.state().x.data());
    }
    state.SetItemsProcessed(state.iterations() * N);
}

void BM_SweepCached(benchmark::State& s) { sweep_bench(s, sw::Kernel::cached); }
void BM_SweepReference(benchmark::State& s) { sweep_bench(s, sw::Kernel::reference); }

void ensemble_bench(benchmark::State& state, bool parallel) {
    const sw::Prior p = sw::bernoulli(0.5);
    const int n = 16;
    sw::ChainSpec spec;
    spec.n_replicas = 2;
    spec.sweeps_burnin = 20;
    std::vector<double> out(n);
    for (auto _ : state) {
        sw::for_each_instance(
            n,
            [&](int k) {
                const sw::Instance inst = sw::sample_instance(p, 300, 2.0, 0.0, 1.0, 0.0, 100 + k);
                const auto s = sw::run_chain(inst, p, spec);
                out[k] = sw::overlap(s[0].configs[0], s[0].configs[1]);
            },
            parallel);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_EnsembleParallel(benchmark::State& s) { ensemble_bench(s, true); }
void BM_EnsembleSerial(benchmark::State& s) { ensemble_bench(s, false); }

}  // namespace

BENCHMARK(BM_SweepCached)->Arg(250)->Arg(1000)->Arg(2000);
BENCHMARK(BM_SweepReference)->Arg(250)->Arg(1000)->Arg(2000);
BENCHMARK(BM_EnsembleParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
