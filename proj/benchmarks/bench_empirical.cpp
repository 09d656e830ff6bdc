#include <benchmark/benchmark.h>

#include "hesspec/hesspec.hpp"

using namespace hesspec;

namespace {

ProblemSpec zero_spec(int p, int n) {
    ProblemSpec s;
    s.p = p;
    s.n = n;
    s.mu = Eigen::VectorXd::Zero(p);
    s.w = s.mu;
    s.w_star = s.mu;
    return s;
}

void BM_SampleFeatures(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const ProblemSpec s = zero_spec(p, 4 * p);
    const FeatureGeometry geo(s);
    Philox4x32 rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sample_features(s, geo, FeatureLaw{}, rng));
}
BENCHMARK(BM_SampleFeatures)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_BuildHessian(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const ProblemSpec s = zero_spec(p, 4 * p);
    const FeatureGeometry geo(s);
    Philox4x32 rng(1);
    const Eigen::MatrixXd x = sample_features(s, geo, FeatureLaw{}, rng);
    const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(4 * p, -0.1, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(build_hessian(x, d));
}
BENCHMARK(BM_BuildHessian)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_RunTrial(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    ProblemSpec s = zero_spec(p, 4 * p);
    s.mu = pm_block(p, 1.2);
    const FeatureGeometry geo(s);
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_trial(s, geo, FeatureLaw{}, seed++));
}
BENCHMARK(BM_RunTrial)->Arg(200)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_KsDistance(benchmark::State& state) {
    Philox4x32 rng(3);
    std::vector<double> a(8000), b(8000);
    for (auto& v : a) v = rng() * 1e-9;
    for (auto& v : b) v = rng() * 1e-9;
    for (auto _ : state) benchmark::DoNotOptimize(ks_distance(a, b));
}
BENCHMARK(BM_KsDistance)->Unit(benchmark::kMicrosecond);

}  // namespace
