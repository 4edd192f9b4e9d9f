#include <benchmark/benchmark.h>

#include <vector>

#include "srmac/filters.hpp"
#include "srmac/srmac_detector.hpp"
#include "srmac/synth.hpp"
#include "srmac/terma_detector.hpp"

namespace {

using namespace srmac;

std::vector<double> bench_signal(double duration_s) {
    SynthConfig config;
    config.duration_s = duration_s;
    config.seed = 99;
    return synth_record(config).record.samples();
}

void BM_EwmaStep(benchmark::State& state) {
    Ewma ewma(0.9);
    double x = 0.25;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ewma.step(x));
        x = -x;
    }
}
BENCHMARK(BM_EwmaStep);

void BM_SmaStep(benchmark::State& state) {
    Sma sma(static_cast<std::size_t>(state.range(0)));
    double x = 0.25;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sma.step(x));
        x = -x;
    }
}
BENCHMARK(BM_SmaStep)->Arg(22)->Arg(133);

// One detector step: three EWMA updates plus region bookkeeping. The alpha
// sweep should show flat per-sample cost; the state never grows.
void BM_DetectorPush(benchmark::State& state) {
    const double alpha = static_cast<double>(state.range(0)) / 100.0;
    SrmacParams params{alpha, 0.97, 0.9, 2.5e-4};
    SrmacDetector detector(params, 200.0);
    const std::vector<double> signal = bench_signal(60.0);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detector.push(signal[i]));
        if (++i == signal.size()) i = 0;
    }
}
BENCHMARK(BM_DetectorPush)->Arg(70)->Arg(80)->Arg(90)->Arg(96);

void BM_SrmacBatch(benchmark::State& state) {
    SynthConfig config;
    config.duration_s = static_cast<double>(state.range(0));
    config.seed = 99;
    const AnnotatedRecord annotated = synth_record(config);
    const SrmacParams params{0.73, 0.80, 0.76, 2.5e-4};
    for (auto _ : state)
        benchmark::DoNotOptimize(srmac_detect_batch(params, annotated.record));
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(annotated.record.size()));
}
BENCHMARK(BM_SrmacBatch)->Arg(60)->Arg(300);

void BM_TermaBatch(benchmark::State& state) {
    SynthConfig config;
    config.duration_s = static_cast<double>(state.range(0));
    config.seed = 99;
    const AnnotatedRecord annotated = synth_record(config);
    const TermaParams params{111.0, 667.0, 0.02};
    for (auto _ : state)
        benchmark::DoNotOptimize(terma_detect_batch(params, annotated.record));
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(annotated.record.size()));
}
BENCHMARK(BM_TermaBatch)->Arg(60)->Arg(300);

void BM_ZeroPhaseBandpass(benchmark::State& state) {
    const std::vector<double> signal = bench_signal(60.0);
    const BiquadCascade cascade = design_bandpass({}, 200.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(filter_batch(cascade, signal, FilterMode::ZeroPhase));
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(signal.size()));
}
BENCHMARK(BM_ZeroPhaseBandpass);

}  // namespace

BENCHMARK_MAIN();
