#include "fwkit/baseaddr_kernels.hpp"

#include <algorithm>
#include <bit>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fwkit::kernels::omp {

namespace {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

struct WordCount {
    std::uint32_t word;
    std::uint32_t count;
};

// Sorted distinct words with multiplicities.
std::vector<WordCount> histogram(std::span<const std::uint32_t> words) {
    std::vector<std::uint32_t> sorted(words.begin(), words.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<WordCount> out;
    for (auto w : sorted) {
        if (!out.empty() && out.back().word == w)
            ++out.back().count;
        else
            out.push_back({w, 1});
    }
    return out;
}

bool better(const BaseVote &a, const std::optional<BaseVote> &best) {
    return !best || a.votes > best->votes || (a.votes == best->votes && a.base < best->base);
}

} // namespace

std::vector<std::uint64_t> score_candidates(const ScoreInput &in, const BaseRange &range) {
    const auto hist = histogram(in.words);
    std::vector<std::uint8_t> is_start(in.blob_size, 0);
    for (auto s : in.string_starts)
        is_start[s] = 1;

    const auto n = static_cast<std::int64_t>(range.count());
    std::vector<std::uint64_t> scores(static_cast<std::size_t>(n), 0);

#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t base = range.start + static_cast<std::uint64_t>(i) * range.stride;
        const std::uint64_t limit = base + in.blob_size;
        auto it = std::lower_bound(hist.begin(), hist.end(), base,
                                   [](const WordCount &wc, std::uint64_t v) { return wc.word < v; });
        std::uint64_t score = 0;
        for (; it != hist.end() && it->word < limit; ++it)
            if (is_start[it->word - base])
                score += it->count;
        scores[static_cast<std::size_t>(i)] = score;
    }
    return scores;
}

std::optional<BaseVote> modal_base(const ScoreInput &in, std::size_t pass_budget) {
    constexpr unsigned kBucketBits = 6;
    constexpr std::size_t kBuckets = std::size_t{1} << kBucketBits;

    const auto hist = histogram(in.words);
    if (hist.empty() || in.string_starts.empty())
        return std::nullopt;

    const std::uint64_t pairs = std::uint64_t{hist.size()} * in.string_starts.size();
    const std::uint64_t wanted = (pairs + pass_budget - 1) / std::max<std::size_t>(pass_budget, 1);
    const std::uint32_t passes = std::bit_ceil(static_cast<std::uint32_t>(std::clamp<std::uint64_t>(wanted, 1, 1u << 20)));

    struct Vote {
        std::uint32_t base;
        std::uint32_t weight;
    };
    const int nthreads = max_threads();
    const auto nwords = static_cast<std::int64_t>(hist.size());
    std::optional<BaseVote> best;

    for (std::uint32_t pass = 0; pass < passes; ++pass) {
        // local[t * kBuckets + b]: votes from thread t that hash to bucket b.
        std::vector<std::vector<Vote>> local(static_cast<std::size_t>(nthreads) * kBuckets);

#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < nwords; ++i) {
            const auto &wc = hist[static_cast<std::size_t>(i)];
            auto *mine = &local[static_cast<std::size_t>(thread_id()) * kBuckets];
            for (auto s : in.string_starts) {
                if (wc.word < s)
                    break;
                const auto base = static_cast<std::uint32_t>(wc.word - s);
                const std::uint32_t h = base * 0x9E3779B1u;
                if ((h & (passes - 1)) != pass)
                    continue;
                mine[h >> (32 - kBucketBits)].push_back({base, wc.count});
            }
        }

        std::vector<std::optional<BaseVote>> bucket_best(kBuckets);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(kBuckets); ++b) {
            std::vector<Vote> all;
            for (int t = 0; t < nthreads; ++t) {
                const auto &src = local[static_cast<std::size_t>(t) * kBuckets + static_cast<std::size_t>(b)];
                all.insert(all.end(), src.begin(), src.end());
            }
            std::sort(all.begin(), all.end(), [](const Vote &x, const Vote &y) { return x.base < y.base; });
            std::optional<BaseVote> top;
            for (std::size_t k = 0; k < all.size();) {
                BaseVote run{all[k].base, 0};
                for (; k < all.size() && all[k].base == run.base; ++k)
                    run.votes += all[k].weight;
                if (better(run, top))
                    top = run;
            }
            bucket_best[static_cast<std::size_t>(b)] = top;
        }

        for (const auto &top : bucket_best)
            if (top && better(*top, best))
                best = top;
    }
    return best;
}

} // namespace fwkit::kernels::omp
