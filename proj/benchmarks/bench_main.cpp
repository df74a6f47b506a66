#include "blowtime/bounds.hpp"
#include "blowtime/heat_kernel.hpp"
#include "blowtime/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace blowtime;

static void BM_SolveLambda(benchmark::State& state) {
    const double q = 1.0 + state.range(0) / 100.0;
    const double y = 0.5 * bounds::e_q(q);
    for (auto _ : state) benchmark::DoNotOptimize(bounds::solve_lambda(q, y));
}
BENCHMARK(BM_SolveLambda)->Arg(1)->Arg(100)->Arg(400);

static void BM_BuildSequence(benchmark::State& state) {
    const double delta1 = 1.0 / static_cast<double>(state.range(0));
    std::int64_t L = 0;
    for (auto _ : state) {
        auto tr = bounds::build_sequence(2.0, 1.0, delta1, bounds::kDefaultCap, false);
        L = tr.L;
    }
    state.counters["L"] = static_cast<double>(L);
    state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_BuildSequence)->Arg(100)->Arg(10'000)->Unit(benchmark::kMicrosecond);

static void BM_DomainMass(benchmark::State& state) {
    const auto domain = state.range(0) == 0 ? geometry::ConvexDomain::disk(1.0) : geometry::ConvexDomain::rectangle(2.0, 1.0);
    const geometry::QuadratureSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(kernel::domain_mass(domain, 0.7, 0.25, spec).value);
}
BENCHMARK(BM_DomainMass)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_ConvexIdentity(benchmark::State& state) {
    const auto domain = geometry::ConvexDomain::disk(1.0);
    const geometry::QuadratureSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(kernel::convex_identity(domain, 0.3, 0.5, spec).residual);
}
BENCHMARK(BM_ConvexIdentity)->Unit(benchmark::kMicrosecond);

// one semi-implicit step at the starting dt level
static void BM_SimulatorStep(benchmark::State& state) {
    sim::SimConfig cfg;
    cfg.n1 = static_cast<int>(state.range(0));
    cfg.n2 = static_cast<int>(state.range(0)) / 2;
    cfg.gamma1 = geometry::BoundaryPartition::full(cfg.domain);
    sim::Simulator s(cfg);
    auto st = s.init();
    s.step(st);  // factorise outside the loop
    for (auto _ : state) {
        st = s.init();
        s.step(st);
    }
    state.counters["nodes"] = static_cast<double>(s.grid().size());
}
BENCHMARK(BM_SimulatorStep)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
