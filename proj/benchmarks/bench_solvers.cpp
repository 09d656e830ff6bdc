#include <benchmark/benchmark.h>

#include "hesspec/hesspec.hpp"

using namespace hesspec;

namespace {

ProblemSpec logistic_spec(int p, int n) {
    ProblemSpec s;
    s.p = p;
    s.n = n;
    Philox4x32 rng(7);
    s.mu = gaussian_direction(p, 1.0, rng);
    s.w_star = s.mu;
    s.w = gaussian_direction(p, 1.0, rng);
    return s;
}

void BM_ExpectationBuild(benchmark::State& state) {
    const ProblemSpec s = logistic_spec(800, 6000);
    const FeatureGeometry geo(s);
    for (auto _ : state) {
        ExpectationEngine eng(s, geo, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(eng.g_max());
    }
}
BENCHMARK(BM_ExpectationBuild)->Arg(64)->Arg(96)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_LambdaMatrix(benchmark::State& state) {
    const ProblemSpec s = logistic_spec(800, 6000);
    const FeatureGeometry geo(s);
    const ExpectationEngine eng(s, geo);
    const cd delta(0.4, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(eng.lambda_matrix(0.1, delta));
}
BENCHMARK(BM_LambdaMatrix)->Unit(benchmark::kMicrosecond);

void BM_SolvePointCold(benchmark::State& state) {
    const BulkSolver bulk(logistic_spec(800, 6000));
    for (auto _ : state) benchmark::DoNotOptimize(bulk.solve_point(cd(0.2, 1e-4)));
}
BENCHMARK(BM_SolvePointCold)->Unit(benchmark::kMicrosecond);

void BM_Support(benchmark::State& state) {
    const BulkSolver bulk(logistic_spec(800, 6000));
    for (auto _ : state) benchmark::DoNotOptimize(bulk.support());
}
BENCHMARK(BM_Support)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_FindSpikes(benchmark::State& state) {
    const BulkSolver bulk(logistic_spec(800, 6000));
    const SupportReport support = bulk.support();
    const SpikeSolver spikes(bulk);
    for (auto _ : state) benchmark::DoNotOptimize(spikes.find_spikes(support));
}
BENCHMARK(BM_FindSpikes)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_Corollary2Oracle(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(corollary2_oracle(2.01, 0.1));
}
BENCHMARK(BM_Corollary2Oracle)->Unit(benchmark::kMillisecond);

}  // namespace
