#include <benchmark/benchmark.h>

#include <numeric>

#include "msgm/arm.hpp"
#include "msgm/bracketing.hpp"
#include "msgm/gaussian.hpp"
#include "msgm/rng.hpp"

using namespace msgm;

namespace {

arm::ArmConfig desk_config(std::size_t K) { return {.M = 2, .D = 8, .K = K, .de = 16, .L = 3, .W = 16}; }

void BM_ArmGradStep(benchmark::State& state) {
    const auto cfg = desk_config(3);
    const auto p = arm::init_params(cfg, RngStream(1));
    const auto truths = arm::make_truth_tables(cfg.K, cfg.M, cfg.D, 1.0, RngStream(2));
    const auto ds = arm::sample_sequences(truths, SourceWeights::uniform(cfg.K), 5000, RngStream(3));
    std::vector<std::size_t> idx(static_cast<std::size_t>(state.range(0)));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (auto _ : state) benchmark::DoNotOptimize(arm::grad_nll(p, ds, idx));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ArmGradStep)->Arg(32)->Arg(100)->Arg(500);

void BM_ArmEnumerate(benchmark::State& state) {
    arm::ArmConfig cfg = desk_config(1);
    cfg.D = static_cast<std::size_t>(state.range(0));
    const auto p = arm::init_params(cfg, RngStream(4));
    for (auto _ : state) benchmark::DoNotOptimize(arm::enumerate_distribution(p, SourceLabel(1)));
}
BENCHMARK(BM_ArmEnumerate)->Arg(8)->Arg(12);

void BM_GaussianFit(benchmark::State& state) {
    const auto truth = gaussian::make_sim_family(5, 10, 0.5);
    const auto ds = gaussian::sample_dataset(truth, SourceWeights::uniform(5), 5000, RngStream(5));
    for (auto _ : state) {
        benchmark::DoNotOptimize(gaussian::fit_multi(ds, truth.d1()));
        benchmark::DoNotOptimize(gaussian::fit_single(ds, truth.d1()));
    }
}
BENCHMARK(BM_GaussianFit);

void BM_GaussianMonteCarloTv(benchmark::State& state) {
    const auto truth = gaussian::make_sim_family(5, 10, 0.5);
    const auto ds = gaussian::sample_dataset(truth, SourceWeights::uniform(5), 500, RngStream(6));
    const auto est = gaussian::fit_multi(ds, truth.d1());
    const auto n_test = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(gaussian::tv_monte_carlo(est, truth, SourceWeights::uniform(5), n_test, RngStream(7)));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaussianMonteCarloTv)->Arg(500)->Arg(200000);

void BM_GaussianBracketVerify(benchmark::State& state) {
    RngStream rng(8);
    const auto target = bracketing::random_target(5, 10, 5, 2.0, gaussian::Mode::multi_estimate, rng);
    const auto elem = bracketing::gaussian_bracket_cover(target, 2.0, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(bracketing::gaussian_bracket_verify(elem, target, 10000, RngStream(9)));
}
BENCHMARK(BM_GaussianBracketVerify);

}  // namespace

BENCHMARK_MAIN();
