#include <random>

#include <benchmark/benchmark.h>

#include "fbmc/equalizer.hpp"
#include "fbmc/filter_bank.hpp"
#include "fbmc/simulation.hpp"
#include "fbmc/thp.hpp"

using namespace fbmc;

namespace {

Eigen::MatrixXcd random_inputs(std::size_t rows, std::size_t cols) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd in(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = {g(rng), g(rng)};
    return in;
}

std::vector<cplx> random_signal(std::size_t n) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<cplx> s(n);
    for (auto& x : s) x = {g(rng), g(rng)};
    return s;
}

// args: M, half-symbols
void BM_SynthesisDirect(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto p = PrototypeFilter::root_raised_cosine(m, 4, 1.0);
    const auto in = random_inputs(m * 3 / 4, static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(sfb_synthesize_direct(in, m / 8, p));
    state.SetItemsProcessed(state.iterations() * in.size());
}

void BM_SynthesisPolyphase(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto p = PrototypeFilter::root_raised_cosine(m, 4, 1.0);
    const auto in = random_inputs(m * 3 / 4, static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(sfb_synthesize(in, m / 8, p));
    state.SetItemsProcessed(state.iterations() * in.size());
}

void BM_AnalysisDirect(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto outputs = static_cast<std::size_t>(state.range(1));
    const auto p = PrototypeFilter::root_raised_cosine(m, 4, 1.0);
    const auto sig = random_signal(outputs * m / 2);
    const UsedBand band{m / 8, m * 3 / 4};
    for (auto _ : state) benchmark::DoNotOptimize(afb_analyze_direct(sig, p, band, outputs));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(outputs * band.count));
}

void BM_AnalysisPolyphase(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto outputs = static_cast<std::size_t>(state.range(1));
    const auto p = PrototypeFilter::root_raised_cosine(m, 4, 1.0);
    const auto sig = random_signal(outputs * m / 2);
    const UsedBand band{m / 8, m * 3 / 4};
    for (auto _ : state) benchmark::DoNotOptimize(afb_analyze(sig, p, band, outputs));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(outputs * band.count));
}

// Desk-scale design of all 48 subcarriers at a fixed latency.
void BM_DesignDfe(benchmark::State& state) {
    SimConfig cfg;
    cfg.latency = 12;
    const LinkSimulator sim(cfg);
    const auto ch = sim.channel(0);
    for (auto _ : state) benchmark::DoNotOptimize(sim.design(Design::dfe_ul, ch, 0.01));
}

void BM_DesignThpSc(benchmark::State& state) {
    SimConfig cfg;
    cfg.latency = 12;
    const LinkSimulator sim(cfg);
    const auto ch = sim.channel(0);
    for (auto _ : state) benchmark::DoNotOptimize(sim.design(Design::thp_sc, ch, 0.01));
}

void BM_LatencySearch(benchmark::State& state) {
    const LinkSimulator sim{SimConfig{}};
    const auto ch = sim.channel(0);
    for (auto _ : state) benchmark::DoNotOptimize(sim.design(Design::dfe_ul, ch, 0.01));
}

void BM_DeskCell(benchmark::State& state) {
    const LinkSimulator sim{SimConfig{}};
    for (auto _ : state) benchmark::DoNotOptimize(sim.run_cell(Design::thp_sum, 20.0, 0));
}

}  // namespace

BENCHMARK(BM_SynthesisDirect)->Args({64, 200})->Args({256, 200})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesisPolyphase)->Args({64, 200})->Args({256, 200})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalysisDirect)->Args({64, 200})->Args({256, 200})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalysisPolyphase)->Args({64, 200})->Args({256, 200})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DesignDfe)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DesignThpSc)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LatencySearch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeskCell)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
