#pragma once

// Scoring kernels behind estimate_base / vote_base. The serial versions
// are direct transcriptions of the scoring rules and serve as the
// reference in tests and benchmarks; the omp versions must agree with
// them exactly.

#include "fwkit/baseaddr.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fwkit::kernels {

/// Every 4-byte-aligned little-endian word of the blob, in blob order.
std::vector<std::uint32_t> aligned_words(ByteView blob);

struct ScoreInput {
    std::span<const std::uint32_t> words;
    std::span<const std::size_t> string_starts; ///< sorted ascending
    std::size_t blob_size = 0;
};

namespace serial {

/// score[i] for candidate start + i * stride.
std::vector<std::uint64_t> score_candidates(const ScoreInput &in, const BaseRange &range);

std::optional<BaseVote> modal_base(const ScoreInput &in);

} // namespace serial

namespace omp {

std::vector<std::uint64_t> score_candidates(const ScoreInput &in, const BaseRange &range);

/// Pairs are tallied in hash-partitioned passes so that no more than
/// `pass_budget` votes are held in memory at once.
std::optional<BaseVote> modal_base(const ScoreInput &in, std::size_t pass_budget = std::size_t{1} << 24);

} // namespace omp

} // namespace fwkit::kernels
