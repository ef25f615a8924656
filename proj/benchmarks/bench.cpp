#include <benchmark/benchmark.h>

#include "steermux/airsim.hpp"
#include "steermux/decoder.hpp"
#include "steermux/harness.hpp"
#include "steermux/rng.hpp"

using namespace steermux;

namespace {

// The paper regime: M = 32 candidates, K = 8 transmitters, P = 24 symbols.
SweepConfig paper_config(ScenarioMode mode) {
    SweepConfig config;
    config.candidate_count = 32;
    config.active_count = 8;
    config.packet_len = 24;
    config.mode = mode;
    config.seed = 1;
    return config;
}

ReceivedMatrix collect(const Scenario& scenario, std::size_t extra) {
    return run_until(scenario, [&](const ReceivedMatrix& y) {
        return rank_stop_rule(y, scenario.sigma2, extra).stop;
    });
}

void bench_svd_split(benchmark::State& state) {
    const Scenario scenario = make_trial_scenario(paper_config(ScenarioMode::AlignedT0), 1e-4, 5, 0);
    const ReceivedMatrix y = collect(scenario, 5);
    const CMatrix mat = y.view();
    for (auto _ : state) {
        benchmark::DoNotOptimize(svd_split(mat, 8));
    }
}

void bench_music_roots(benchmark::State& state) {
    const Scenario scenario = make_trial_scenario(paper_config(ScenarioMode::AlignedT0), 1e-4, 5, 0);
    const ReceivedMatrix y = collect(scenario, 5);
    const SubspaceSplit split = svd_split(y.view(), 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_polynomial(music_polynomial(split.noise_basis, 0, false)));
    }
}

void bench_full_decode(benchmark::State& state) {
    const auto mode = static_cast<ScenarioMode>(state.range(0));
    const Scenario scenario = make_trial_scenario(paper_config(mode), 1e-4, 5, 0);
    const ReceivedMatrix y = collect(scenario, 5);
    const DecodeParams params = side_info_params(scenario, mode, 1e-4, 5, 4, y.rows());
    for (auto _ : state) {
        benchmark::DoNotOptimize(full_decode(y, scenario.assignment, params));
    }
}

void bench_simulate_slot(benchmark::State& state) {
    const Scenario scenario = make_trial_scenario(paper_config(ScenarioMode::Misaligned), 1e-4, 5, 0);
    std::size_t slot = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_slot(scenario, slot));
        slot = slot % 12 + 1;
    }
}

void bench_run_trial(benchmark::State& state) {
    const SweepConfig config = paper_config(static_cast<ScenarioMode>(state.range(0)));
    std::uint64_t trial = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trial(config, 1e-4, 5, trial++));
    }
}

}  // namespace

BENCHMARK(bench_svd_split);
BENCHMARK(bench_music_roots);
BENCHMARK(bench_full_decode)
    ->Arg(static_cast<int>(ScenarioMode::AlignedT0))
    ->Arg(static_cast<int>(ScenarioMode::Misaligned));
BENCHMARK(bench_simulate_slot);
BENCHMARK(bench_run_trial)
    ->Arg(static_cast<int>(ScenarioMode::AlignedT0))
    ->Arg(static_cast<int>(ScenarioMode::Fading))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
