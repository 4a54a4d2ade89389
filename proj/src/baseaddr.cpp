#include "fwkit/baseaddr.hpp"

#include "fwkit/baseaddr_kernels.hpp"

#include <algorithm>

namespace fwkit {

namespace {

bool printable(std::uint8_t c) { return c >= 0x20 && c <= 0x7e; }

void check_range(const BaseRange &r) {
    if (r.stride == 0)
        throw BaseScanError(BaseScanErrc::BadStride, "stride must be positive");
    if (r.end > (std::uint64_t{1} << 32))
        throw BaseScanError(BaseScanErrc::RangeTooLarge, "range end " + hex(r.end) + " exceeds 2^32");
    if (r.start >= r.end)
        throw BaseScanError(BaseScanErrc::EmptyRange, "EmptyRange: start " + hex(r.start) + " >= end " + hex(r.end));
}

} // namespace

std::vector<DetectedString> detect_strings(ByteView blob, std::size_t min_len) {
    min_len = std::max<std::size_t>(min_len, 1);
    std::vector<DetectedString> found;
    std::size_t i = 0;
    while (i < blob.size()) {
        if (!printable(blob[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < blob.size() && printable(blob[j]))
            ++j;
        if (j < blob.size() && blob[j] == 0 && j - i >= min_len)
            found.push_back({i, j - i});
        i = j;
    }
    return found;
}

std::uint64_t BaseRange::count() const { return start >= end || stride == 0 ? 0 : (end - start + stride - 1) / stride; }

std::vector<BaseCandidate> estimate_base(ByteView blob, const BaseRange &range, std::size_t min_len,
                                         Backend backend) {
    check_range(range);

    const auto strings = detect_strings(blob, min_len);
    std::vector<std::size_t> starts;
    starts.reserve(strings.size());
    for (const auto &s : strings)
        starts.push_back(s.offset);
    const auto words = kernels::aligned_words(blob);
    const kernels::ScoreInput in{words, starts, blob.size()};

    const auto scores = backend == Backend::Serial ? kernels::serial::score_candidates(in, range)
                                                   : kernels::omp::score_candidates(in, range);

    std::vector<BaseCandidate> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        out[i] = {static_cast<std::uint32_t>(range.start + i * range.stride), scores[i], 0};
    std::sort(out.begin(), out.end(), [](const BaseCandidate &a, const BaseCandidate &b) {
        return a.score != b.score ? a.score > b.score : a.base < b.base;
    });
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].rank = i + 1;
    return out;
}

std::optional<BaseVote> vote_base(ByteView blob, std::size_t min_len, std::uint64_t min_votes, Backend backend) {
    const auto strings = detect_strings(blob, min_len);
    if (strings.empty())
        return std::nullopt;
    std::vector<std::size_t> starts;
    starts.reserve(strings.size());
    for (const auto &s : strings)
        starts.push_back(s.offset);
    const auto words = kernels::aligned_words(blob);
    const kernels::ScoreInput in{words, starts, blob.size()};

    auto mode = backend == Backend::Serial ? kernels::serial::modal_base(in) : kernels::omp::modal_base(in);
    if (!mode || mode->votes < min_votes)
        return std::nullopt;
    return mode;
}

} // namespace fwkit
