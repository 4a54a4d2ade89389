#include "fwkit/baseaddr_kernels.hpp"

#include <algorithm>
#include <unordered_map>

namespace fwkit::kernels {

std::vector<std::uint32_t> aligned_words(ByteView blob) {
    std::vector<std::uint32_t> words;
    words.reserve(blob.size() / 4);
    for (std::size_t at = 0; at + 4 <= blob.size(); at += 4)
        words.push_back(load_le32(blob, at));
    return words;
}

namespace serial {

std::vector<std::uint64_t> score_candidates(const ScoreInput &in, const BaseRange &range) {
    std::vector<std::uint64_t> scores;
    scores.reserve(range.count());
    for (std::uint64_t base = range.start; base < range.end; base += range.stride) {
        std::uint64_t score = 0;
        for (auto w : in.words) {
            if (w < base)
                continue;
            const std::uint64_t off = w - base;
            if (std::binary_search(in.string_starts.begin(), in.string_starts.end(), off))
                ++score;
        }
        scores.push_back(score);
    }
    return scores;
}

std::optional<BaseVote> modal_base(const ScoreInput &in) {
    std::unordered_map<std::uint32_t, std::uint64_t> votes;
    for (auto w : in.words)
        for (auto s : in.string_starts)
            if (w >= s)
                ++votes[static_cast<std::uint32_t>(w - s)];

    std::optional<BaseVote> best;
    for (const auto &[base, n] : votes)
        if (!best || n > best->votes || (n == best->votes && base < best->base))
            best = BaseVote{base, n};
    return best;
}

} // namespace serial

} // namespace fwkit::kernels
