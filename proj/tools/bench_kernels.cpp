#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ambc/dsp.hpp"
#include "ambc/lte_waveform.hpp"

using ambc::cplx;
using ambc::dsp::Exec;

namespace {

std::vector<cplx> random_cplx(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(g(rng), g(rng));
    return v;
}

std::vector<double> random_real(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

void bm_fir(benchmark::State& state, Exec ex) {
    const auto x = random_real(200000, 1);
    const auto taps = ambc::dsp::lowpass_taps(129, 1000.0, 14000.0, 5.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(ambc::dsp::fir_filter(std::span<const double>(x), taps, ex));
}

void bm_xcorr(benchmark::State& state, Exec ex) {
    const auto x = random_cplx(768000, 2);
    const auto h = random_cplx(512, 3);
    for (auto _ : state) {
        if (ex == Exec::serial)
            benchmark::DoNotOptimize(ambc::dsp::xcorr_serial(x, h));
        else
            benchmark::DoNotOptimize(ambc::dsp::xcorr(x, h, ex));
    }
}

void bm_modulate(benchmark::State& state, Exec ex) {
    ambc::CellConfig cfg;
    const auto grid = ambc::build_grid(cfg, 20, 7);
    for (auto _ : state) benchmark::DoNotOptimize(ambc::ofdm_modulate(grid, ex));
}

}  // namespace

BENCHMARK_CAPTURE(bm_fir, serial, Exec::serial);
BENCHMARK_CAPTURE(bm_fir, parallel, Exec::parallel);
BENCHMARK_CAPTURE(bm_xcorr, serial, Exec::serial);
BENCHMARK_CAPTURE(bm_xcorr, parallel, Exec::parallel);
BENCHMARK_CAPTURE(bm_modulate, serial, Exec::serial);
BENCHMARK_CAPTURE(bm_modulate, parallel, Exec::parallel);

BENCHMARK_MAIN();
