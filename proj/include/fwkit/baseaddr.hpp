#pragma once

// Load-address recovery for raw firmware blobs.
//
// Debug strings in an unencrypted image give away its load address: code
// refers to strings through word-aligned absolute pointers (literal pools
// on ARMv6-M), so at the right base many words land exactly on string
// starts. estimate_base scores a grid of candidate bases; vote_base lets
// every (word, string) pair nominate a base and takes the mode, which
// also recovers bases that are not grid-aligned.

#include "fwkit/bytes.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fwkit {

inline constexpr std::size_t kDefaultMinStringLength = 5;

struct DetectedString {
    std::size_t offset = 0;
    std::size_t length = 0; ///< excludes the NUL terminator

    friend bool operator==(const DetectedString &, const DetectedString &) = default;
};

/// Maximal runs of printable ASCII (0x20-0x7e) of at least `min_len`
/// bytes that end in a NUL, in offset order.
std::vector<DetectedString> detect_strings(ByteView blob, std::size_t min_len = kDefaultMinStringLength);

/// Candidate bases start, start + stride, ... below end.
struct BaseRange {
    std::uint64_t start = 0x00000000;
    std::uint64_t end = 0x00080000;
    std::uint64_t stride = 0x1000;

    std::uint64_t count() const;
};

struct BaseCandidate {
    std::uint32_t base = 0;
    std::uint64_t score = 0;
    std::size_t rank = 0; ///< 1-based

    friend bool operator==(const BaseCandidate &, const BaseCandidate &) = default;
};

enum class BaseScanErrc { EmptyRange, BadStride, RangeTooLarge };

class BaseScanError : public std::invalid_argument {
  public:
    BaseScanError(BaseScanErrc code, const std::string &what) : std::invalid_argument(what), code_(code) {}
    BaseScanErrc code() const noexcept { return code_; }

  private:
    BaseScanErrc code_;
};

enum class Backend { Serial, Parallel };

/// Scores every candidate in `range` and returns all of them sorted by
/// score (descending), then base (ascending). Both backends return the
/// identical list.
std::vector<BaseCandidate> estimate_base(ByteView blob, const BaseRange &range,
                                         std::size_t min_len = kDefaultMinStringLength,
                                         Backend backend = Backend::Parallel);

struct BaseVote {
    std::uint32_t base = 0;
    std::uint64_t votes = 0;

    friend bool operator==(const BaseVote &, const BaseVote &) = default;
};

/// Modal base over all (aligned word, string start) pairs; ties go to the
/// lower base. Empty when the mode has fewer than `min_votes` votes or
/// there is nothing to vote on.
std::optional<BaseVote> vote_base(ByteView blob, std::size_t min_len, std::uint64_t min_votes,
                                  Backend backend = Backend::Parallel);

} // namespace fwkit
