// Serial reference kernels vs OpenMP kernels for the two base estimators.
// Blob sizes sweep a small bootloader up to a 256 KiB image; the voter
// tallies every word/string pair, so its sweep stops at 64 KiB.

#include "fwkit/baseaddr.hpp"
#include "fwkit/fixture.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

using namespace fwkit;

namespace {

const Bytes &blob(std::size_t size) {
    static std::map<std::size_t, Bytes> cache;
    auto it = cache.find(size);
    if (it == cache.end()) {
        FixtureSpec s;
        s.seed = size;
        s.payload_size = size;
        s.n_strings = size / 256;
        s.n_refs = size / 128;
        s.base = 0x3AC00;
        it = cache.emplace(size, gen_fixture(s).blob).first;
    }
    return it->second;
}

void scan(benchmark::State &st, Backend backend) {
    const auto &b = blob(static_cast<std::size_t>(st.range(0)));
    const BaseRange range{0, 0x80000, 0x100};
    for (auto _ : st)
        benchmark::DoNotOptimize(estimate_base(b, range, kDefaultMinStringLength, backend));
    st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations()) * st.range(0));
    st.counters["threads"] = backend == Backend::Parallel ? omp_get_max_threads() : 1;
}

void vote(benchmark::State &st, Backend backend) {
    const auto &b = blob(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(vote_base(b, kDefaultMinStringLength, 1, backend));
    st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations()) * st.range(0));
    st.counters["threads"] = backend == Backend::Parallel ? omp_get_max_threads() : 1;
}

} // namespace

BENCHMARK_CAPTURE(scan, serial, Backend::Serial)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(scan, omp, Backend::Parallel)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(vote, serial, Backend::Serial)->RangeMultiplier(4)->Range(1 << 12, 1 << 16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(vote, omp, Backend::Parallel)->RangeMultiplier(4)->Range(1 << 12, 1 << 16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
