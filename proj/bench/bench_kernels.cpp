// Serial reference vs OpenMP kernels, plus the end-to-end rate evaluation.
// SPDC_ADAPT_THREADS caps the worker count of the parallel variants.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "aspdc/experiment.hpp"
#include "aspdc/kernels.hpp"
#include "aspdc/optics.hpp"

using namespace aspdc;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

void BM_inner_serial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::inner(a, b));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_inner_parallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::inner(a, b, n));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_norm2_serial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto a = random_vec(n * n, 3);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::norm2(a));
}

void BM_norm2_parallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto a = random_vec(n * n, 3);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::norm2(a, n));
}

// 100 mode products against one pump window, as in the rate evaluation
void BM_matvec_serial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto m = random_vec(100 * n * n, 4), v = random_vec(n * n, 5);
    std::vector<cplx> out(100);
    for (auto _ : st) {
        kernels::serial::matvec_conj(m, v, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_matvec_parallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto m = random_vec(100 * n * n, 4), v = random_vec(n * n, 5);
    std::vector<cplx> out(100);
    for (auto _ : st) {
        kernels::parallel::matvec_conj(m, v, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_propagate(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const ComplexField f = gaussian_beam(GridSpec(n, 20e-6), 808e-9, 40e-6 * static_cast<double>(n) / 16.0);
    for (auto _ : st) benchmark::DoNotOptimize(propagate(f, 0.05));
}

const Bench& bench() {
    static const Bench b(scenario_preset("multimode_pinholes").bench);
    return b;
}

void BM_rate_fast(benchmark::State& st) {
    const Bench& b = bench();
    const MirrorState s = b.flat_state();
    for (auto _ : st) benchmark::DoNotOptimize(b.relative_rate(s));
}

void BM_rate_klyshko(benchmark::State& st) {
    const Bench& b = bench();
    const MirrorState s = b.flat_state();
    for (auto _ : st) benchmark::DoNotOptimize(b.klyshko_rate(s));
}

} // namespace

BENCHMARK(BM_inner_serial)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_inner_parallel)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_norm2_serial)->Arg(256)->Arg(512);
BENCHMARK(BM_norm2_parallel)->Arg(256)->Arg(512);
BENCHMARK(BM_matvec_serial)->Arg(64)->Arg(128);
BENCHMARK(BM_matvec_parallel)->Arg(64)->Arg(128);
BENCHMARK(BM_propagate)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rate_fast)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rate_klyshko)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
